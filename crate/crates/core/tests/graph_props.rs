mod common;

use std::time::Instant;

use proptest::prelude::*;

use dgg_core::graph::{condense, reachable_from, scc_decompose, topological_order, Digraph, SccClass};

use common::{random_digraph, reachability, rng};

/// Checks a decomposition against the transitive-closure oracle.
#[allow(clippy::needless_range_loop)]
fn check_scc(g: &Digraph) -> Result<(), String> {
    let d = scc_decompose(g);
    let reach = reachability(g);
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    for j in 0..d.len() {
        let comp = d.component(j);
        if comp.is_empty() {
            return Err(format!("component {j} is empty"));
        }
        for &v in comp {
            if seen[v] {
                return Err(format!("vertex {v} in two components"));
            }
            seen[v] = true;
            if d.component_of(v) != j {
                return Err(format!("component_of({v}) disagrees"));
            }
        }
        // Strongly connected and maximal.
        for u in 0..n {
            let inside = comp.contains(&u);
            let mutual = reach[comp[0]][u] && reach[u][comp[0]];
            if inside != mutual {
                return Err(format!("vertex {u} misplaced relative to component {j}"));
            }
        }
        let leaves = comp.iter().any(|&v| g.successors(v).any(|w| d.component_of(w) != j));
        let self_loop = comp.len() == 1 && g.has_edge(comp[0], comp[0]);
        let expected = if !leaves {
            SccClass::Terminal
        } else if comp.len() == 1 && !self_loop {
            SccClass::Transient
        } else {
            SccClass::Inner
        };
        if d.class(j) != expected {
            return Err(format!("component {j} classified {:?}, expected {expected:?}", d.class(j)));
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err("some vertex is in no component".into());
    }
    let mins: Vec<usize> = (0..d.len()).map(|j| *d.component(j).iter().min().unwrap()).collect();
    if mins.windows(2).any(|w| w[0] >= w[1]) {
        return Err("components not numbered by smallest vertex".into());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scc_partition_is_maximal(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 8);
        prop_assert_eq!(check_scc(&g), Ok(()));
    }

    #[test]
    fn condensation_is_acyclic_with_sinks_terminal(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 10);
        let d = scc_decompose(&g);
        let c = condense(&g, &d);
        prop_assert_eq!(c.digraph.vertex_count(), d.len());
        prop_assert!(topological_order(&c.digraph).is_some());
        for j in 0..d.len() {
            let sink = c.digraph.out_degree(j) == 0;
            prop_assert_eq!(sink, d.class(j) == SccClass::Terminal);
        }
        prop_assert!(!c.sinks().is_empty());
    }

    #[test]
    fn reachability_matches_closure(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 8);
        let reach = reachability(&g);
        for v in g.vertices() {
            prop_assert_eq!(&reachable_from(&g, v), &reach[v]);
        }
    }
}

#[test]
fn decomposition_is_linear_time() {
    // A long chain of 2-cycles with extra chords: 10^6 edges.
    let build = |m: usize| {
        let n = m / 2;
        let mut g = Digraph::new();
        for v in 0..n {
            g.add_vertex(&v.to_string()).unwrap();
        }
        let mut edges = 0;
        let mut v = 0;
        while edges < m {
            let a = v % n;
            let b = (v + 1) % n;
            g.add_edge(a, b);
            edges += 1;
            if v % 3 == 0 {
                g.add_edge(b, a);
                edges += 1;
            }
            v += 1;
        }
        g
    };
    let time = |g: &Digraph| {
        let start = Instant::now();
        let d = scc_decompose(g);
        (start.elapsed().as_secs_f64(), d.len())
    };
    let small = build(100_000);
    let large = build(1_000_000);
    let (t_small, _) = time(&small);
    let (t_large, comps) = time(&large);
    assert!(comps >= 1);
    assert!(t_large < 5.0, "10^6 edges took {t_large:.3} s");
    // Linear scaling: ten times the edges within a generous constant factor.
    assert!(t_large < 40.0 * t_small.max(1e-4), "small {t_small:.4} s, large {t_large:.4} s");
}

#[test]
fn deep_chain_does_not_overflow_the_stack() {
    let n = 200_000;
    let mut g = Digraph::new();
    for v in 0..n {
        g.add_vertex(&v.to_string()).unwrap();
    }
    for v in 0..n - 1 {
        g.add_edge(v, v + 1);
    }
    g.add_edge(n - 1, 0);
    let d = scc_decompose(&g);
    assert_eq!(d.len(), 1);
    assert_eq!(d.class(0), SccClass::Terminal);
}
