mod common;

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use dgg_core::equilibrium::{all_ne, brute_force_ne_free_profiles, SearchCaps};
use dgg_core::fixtures::PaperCounterexample;
use dgg_core::game::DEFAULT_CELL_CAP;
use dgg_core::preference::PreferenceProfile;
use dgg_core::sat::{
    build_acyclicity_cnf, decode_model, encode, enumerate_models, parse_dimacs, profile_to_assignment, solve,
    to_dimacs, EncodeError, Provenance,
};

use common::{random_cnf, random_game_with_outcomes, rng, truth_table_models};

type ProfileSet = BTreeSet<Vec<Vec<usize>>>;

/// Decoded SAT models and brute-force NE-free profiles, as sets.
fn both_sides(seed: u64) -> (ProfileSet, ProfileSet) {
    let mut r = rng(seed);
    let (gs, os) = random_game_with_outcomes(&mut r, 1..=3, 5, 1, 3);
    let key = |pp: &PreferenceProfile| pp.preferences().iter().map(|p| p.order().to_vec()).collect::<Vec<_>>();
    let brute: BTreeSet<_> = brute_force_ne_free_profiles(&gs, &os, SearchCaps::default())
        .unwrap()
        .iter()
        .map(key)
        .collect();
    let sat = match encode(&gs, &os, DEFAULT_CELL_CAP) {
        Ok(cnf) => enumerate_models(&cnf, 10_000)
            .unwrap()
            .iter()
            .map(|m| key(&decode_model(&cnf, m).unwrap()))
            .collect(),
        Err(EncodeError::EmptyClause { .. }) => BTreeSet::new(),
        Err(e) => panic!("{e}"),
    };
    (sat, brute)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dpll_agrees_with_truth_tables(seed in any::<u64>()) {
        let cnf = random_cnf(&mut rng(seed), 8, 30);
        let table = truth_table_models(&cnf);
        match solve(&cnf).model() {
            Some(m) => prop_assert!(m.satisfies(&cnf)),
            None => prop_assert!(table.is_empty()),
        }
        prop_assert_eq!(solve(&cnf).model().is_some(), !table.is_empty());
        let models: HashSet<Vec<bool>> = enumerate_models(&cnf, 1 << 8).unwrap().into_iter().map(|a| a.0).collect();
        prop_assert_eq!(models, table.into_iter().collect::<HashSet<_>>());
    }

    #[test]
    fn dimacs_round_trip_is_byte_stable(seed in any::<u64>()) {
        let cnf = random_cnf(&mut rng(seed), 10, 20);
        let text = to_dimacs(&cnf);
        let parsed = parse_dimacs(&text).unwrap();
        prop_assert_eq!(&parsed, &cnf);
        prop_assert_eq!(to_dimacs(&parsed), text);
    }

    #[test]
    fn encodings_round_trip_with_comments(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (gs, os) = random_game_with_outcomes(&mut r, 1..=3, 5, 2, 4);
        if let Ok(cnf) = encode(&gs, &os, DEFAULT_CELL_CAP) {
            let text = to_dimacs(&cnf);
            let parsed = parse_dimacs(&text).unwrap();
            prop_assert_eq!(&parsed, &cnf);
            prop_assert_eq!(to_dimacs(&parsed), text);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn sat_models_are_the_ne_free_profiles(seed in any::<u64>()) {
        let (sat, brute) = both_sides(seed);
        prop_assert_eq!(sat, brute);
    }
}

#[test]
fn acyclicity_models_are_exactly_the_profiles() {
    for (k, n) in [(1, 2), (2, 2), (3, 1), (3, 2), (4, 1)] {
        let mut b = dgg_core::game::GameBuilder::new(1).position("s", 1).initial("s");
        for t in 0..k {
            b = b.terminal(&format!("t{t}")).edge("s", &format!("t{t}"));
        }
        let os = dgg_core::game::build_outcomes(&b.build().unwrap());
        let cnf = build_acyclicity_cnf(&os, n);
        let models = enumerate_models(&cnf, 100_000).unwrap();
        let per: usize = (1..=k).product();
        assert_eq!(models.len(), per.pow(n as u32), "k={k} n={n}");
        let vars = cnf.vars().unwrap();
        for m in &models {
            let pp = decode_model(&cnf, m).unwrap();
            assert_eq!(&profile_to_assignment(vars, &pp), m);
        }
    }
}

#[test]
fn counterexample_encoding_shape() {
    let p = PaperCounterexample::load();
    let cnf = encode(&p.game, &p.outcomes, DEFAULT_CELL_CAP).unwrap();
    assert_eq!(cnf.var_count(), 30);
    assert_eq!(cnf.count_acyclicity(), 60);
    assert_eq!(cnf.count_ne_free(), 192);
    assert!(to_dimacs(&cnf).contains("\np cnf 30 252\n"));
    for (i, prov) in cnf.provenance().iter().enumerate().skip(60) {
        assert_eq!(prov, &Provenance::NeFree { situation: i - 60 });
    }
    let dedup = cnf.dedup();
    assert!(dedup.len() <= cnf.len());
    assert_eq!(to_dimacs(&parse_dimacs(&to_dimacs(&dedup)).unwrap()), to_dimacs(&dedup));
}

#[test]
fn counterexample_models_are_the_295_ne_free_profiles() {
    let p = PaperCounterexample::load();
    let cnf = encode(&p.game, &p.outcomes, DEFAULT_CELL_CAP).unwrap();
    let models = enumerate_models(&cnf, 10_000).unwrap();
    assert_eq!(models.len(), 295);
    let decoded: HashSet<PreferenceProfile> = models.iter().map(|m| decode_model(&cnf, m).unwrap()).collect();
    let brute: HashSet<PreferenceProfile> = brute_force_ne_free_profiles(&p.game, &p.outcomes, SearchCaps::default())
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(brute.len(), 295);
    assert_eq!(decoded, brute);
    assert!(decoded.contains(&p.preferences));
    for pp in decoded.iter().take(20) {
        assert!(all_ne(&p.game, &p.outcomes, pp, DEFAULT_CELL_CAP).unwrap().is_empty());
    }
    let own = profile_to_assignment(cnf.vars().unwrap(), &p.preferences);
    assert!(own.satisfies(&cnf));
    assert!(models.contains(&own));
}

#[test]
fn merged_counterexample_is_unsat() {
    let p = PaperCounterexample::load();
    let merged = dgg_core::preference::merge_cyclic(&p.outcomes).unwrap();
    match encode(&p.game, &merged, DEFAULT_CELL_CAP) {
        Ok(cnf) => {
            assert_eq!(cnf.var_count(), 9);
            assert!(solve(&cnf).model().is_none());
        }
        Err(EncodeError::EmptyClause { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}
