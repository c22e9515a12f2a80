mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;

use dgg_core::equilibrium::ne_cells;
use dgg_core::fixtures::PaperCounterexample;
use dgg_core::game::{normal_form, GameStructure, OutcomeSet, DEFAULT_CELL_CAP};
use dgg_core::preference::{
    cnd_c0, cnd_c22, enumerate_preference_profiles, merge_cyclic, permutation_at, project_profile, rank_vector,
    Preference, PreferenceProfile,
};

use common::{cyclic_count, random_game_with_outcomes, random_preference, random_profile, rng};

/// Every equilibrium of the lifted game is an equilibrium of the merged one.
fn merge_is_sound(gs: &GameStructure, os: &OutcomeSet, coarse: &PreferenceProfile, within: &[Vec<usize>]) -> bool {
    let merged = merge_cyclic(os).unwrap();
    let map = os.map_into(&merged);
    let fine = PreferenceProfile::new(
        coarse
            .preferences()
            .iter()
            .zip(within)
            .map(|(p, w)| p.lift(&map, w))
            .collect(),
    )
    .unwrap();
    let nf = normal_form(gs, os, DEFAULT_CELL_CAP).unwrap();
    let merged_nf = nf.map_outcomes(&map);
    let merged_ne: HashSet<usize> = ne_cells(&merged_nf, coarse).into_iter().collect();
    ne_cells(&nf, &fine).iter().all(|c| merged_ne.contains(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn preferences_are_strict_total_orders(seed in any::<u64>(), k in 1usize..7) {
        let p = random_preference(&mut rng(seed), k);
        for a in 0..k {
            prop_assert!(!p.better(a, a));
            for b in 0..k {
                if a != b {
                    prop_assert!(p.better(a, b) ^ p.better(b, a));
                }
                for c in 0..k {
                    if p.better(a, b) && p.better(b, c) {
                        prop_assert!(p.better(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn rank_vector_is_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (gs, os) = random_game_with_outcomes(&mut r, 1..=3, 6, 1, 6);
        let pp = random_profile(&mut r, gs.players(), os.len());
        let rv = rank_vector(&os, &pp);
        let terminals = os.terminal_ids().len();
        prop_assert_eq!(rv.0.len(), gs.players());
        prop_assert!(rv.0.iter().all(|&x| x <= terminals));
        prop_assert_eq!(cnd_c0(&os, &pp), rv.0.iter().all(|&x| x == 0));
        prop_assert_eq!(cnd_c22(&os, &pp), rv.0.iter().filter(|&&x| x >= 2).count() >= 2);
        if cyclic_count(&os) == 0 {
            prop_assert!(cnd_c0(&os, &pp));
        }
    }

    #[test]
    fn merge_soundness_on_random_games(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (gs, os) = loop {
            let (gs, os) = random_game_with_outcomes(&mut r, 1..=3, 6, 2, 6);
            if cyclic_count(&os) >= 1 {
                break (gs, os);
            }
        };
        let merged = merge_cyclic(&os).unwrap();
        let coarse = random_profile(&mut r, gs.players(), merged.len());
        let within: Vec<Vec<usize>> = (0..gs.players())
            .map(|_| {
                let mut w: Vec<usize> = (0..os.len()).collect();
                w.shuffle(&mut r);
                w
            })
            .collect();
        prop_assert!(merge_is_sound(&gs, &os, &coarse, &within));
    }

    #[test]
    fn lift_then_project_is_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (gs, os) = loop {
            let (gs, os) = random_game_with_outcomes(&mut r, 1..=3, 6, 2, 6);
            if cyclic_count(&os) >= 1 {
                break (gs, os);
            }
        };
        let merged = merge_cyclic(&os).unwrap();
        let map = os.map_into(&merged);
        let coarse = random_profile(&mut r, gs.players(), merged.len());
        let mut within: Vec<usize> = (0..os.len()).collect();
        within.shuffle(&mut r);
        let fine = PreferenceProfile::new(coarse.preferences().iter().map(|p| p.lift(&map, &within)).collect()).unwrap();
        prop_assert_eq!(project_profile(&fine, &map, merged.len()), Some(coarse));
    }

    #[test]
    fn permutation_decoding_is_lexicographic(k in 0usize..6) {
        let total: usize = (1..=k).product();
        let perms: Vec<Vec<usize>> = (0..total).map(|i| permutation_at(k, i)).collect();
        prop_assert!(perms.windows(2).all(|w| w[0] < w[1]));
        let distinct: HashSet<_> = perms.iter().cloned().collect();
        prop_assert_eq!(distinct.len(), total);
    }
}

#[test]
fn merge_soundness_on_the_counterexample_exhaustively() {
    let p = PaperCounterexample::load();
    let merged = merge_cyclic(&p.outcomes).unwrap();
    let enumeration = enumerate_preference_profiles(merged.len(), 3, 1_000).unwrap();
    // Every internal order of the three cyclic outcomes, same for all players.
    let cyclic = p.outcomes.cyclic_ids();
    let internal: Vec<Vec<usize>> = (0..6)
        .map(|i| permutation_at(3, i).iter().map(|&j| cyclic[j]).collect())
        .collect();
    for coarse in enumeration.iter() {
        for order in &internal {
            let mut within = order.clone();
            within.extend(p.outcomes.terminal_ids());
            let w = vec![within; 3];
            assert!(merge_is_sound(&p.game, &p.outcomes, &coarse, &w));
        }
    }
}

#[test]
fn profile_enumeration_is_deterministic_and_splittable() {
    let e = enumerate_preference_profiles(3, 2, 1_000).unwrap();
    assert_eq!(e.len(), 36);
    let all: Vec<PreferenceProfile> = e.iter().collect();
    let split: Vec<PreferenceProfile> = e.range(0..10).chain(e.range(10..36)).collect();
    assert_eq!(all, split);
    assert_eq!(all.iter().collect::<HashSet<_>>().len(), 36);
    // Player-major: the first player's order changes slowest.
    assert_eq!(all[0].get(0).order(), all[5].get(0).order());
    assert_ne!(all[5].get(0).order(), all[6].get(0).order());
    assert!(enumerate_preference_profiles(5, 3, 1_000_000).is_err());
    assert_eq!(enumerate_preference_profiles(5, 3, 1_728_000).unwrap().len(), 1_728_000);
}

#[test]
fn score_constructor_rejects_ties() {
    assert!(Preference::from_scores(&[1.0, 2.0, 1.0]).is_err());
    let p = Preference::from_scores(&[2.0, 3.0, 1.0]).unwrap();
    assert_eq!(p.order(), &[1, 0, 2]);
}
