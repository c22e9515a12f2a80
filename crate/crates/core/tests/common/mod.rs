#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dgg_core::game::{build_outcomes, GameBuilder, GameStructure, OutcomeKind, OutcomeSet};
use dgg_core::graph::Digraph;
use dgg_core::preference::{Preference, PreferenceProfile};
use dgg_core::sat::{Cnf, Lit};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub players: usize,
    pub positions: usize,
    pub terminals: usize,
    /// Upper bound on moves per position.
    pub max_moves: usize,
    /// Every player owns exactly one position (forces `positions = players`).
    pub play_once: bool,
}

/// A random valid game structure of the given shape. Every position gets
/// between one and `max_moves` distinct moves; players own positions at
/// random unless the game is play-once.
pub fn random_game(rng: &mut ChaCha8Rng, shape: Shape) -> GameStructure {
    let positions = if shape.play_once { shape.players } else { shape.positions };
    let mut b = GameBuilder::new(shape.players);
    let mut owners: Vec<usize> = (0..positions).map(|v| v % shape.players).collect();
    if !shape.play_once {
        for o in owners.iter_mut() {
            *o = rng.gen_range(0..shape.players);
        }
    }
    owners.shuffle(rng);
    for (v, &o) in owners.iter().enumerate() {
        b = b.position(&format!("p{v}"), o + 1);
    }
    for t in 0..shape.terminals {
        b = b.terminal(&format!("t{t}"));
    }
    b = b.initial("p0");
    let heads: Vec<String> = (0..positions)
        .map(|v| format!("p{v}"))
        .chain((0..shape.terminals).map(|t| format!("t{t}")))
        .collect();
    for v in 0..positions {
        let k = rng.gen_range(1..=shape.max_moves.min(heads.len()));
        let chosen: Vec<&String> = heads.choose_multiple(rng, k).collect();
        for h in chosen {
            b = b.edge(&format!("p{v}"), h);
        }
    }
    b.build().expect("generator builds valid games")
}

/// Random games of random shape, keeping only those with between `min_k`
/// and `max_k` outcomes.
pub fn random_game_with_outcomes(
    rng: &mut ChaCha8Rng,
    players: std::ops::RangeInclusive<usize>,
    max_positions: usize,
    min_k: usize,
    max_k: usize,
) -> (GameStructure, OutcomeSet) {
    loop {
        let n = rng.gen_range(players.clone());
        let shape = Shape {
            players: n,
            positions: rng.gen_range(1..=max_positions),
            terminals: rng.gen_range(0..=3),
            max_moves: 3,
            play_once: false,
        };
        let gs = random_game(rng, shape);
        let os = build_outcomes(&gs);
        if (min_k..=max_k).contains(&os.len()) {
            return (gs, os);
        }
    }
}

pub fn random_preference(rng: &mut ChaCha8Rng, k: usize) -> Preference {
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    Preference::from_order(order).unwrap()
}

pub fn random_profile(rng: &mut ChaCha8Rng, players: usize, k: usize) -> PreferenceProfile {
    PreferenceProfile::new((0..players).map(|_| random_preference(rng, k)).collect()).unwrap()
}

/// A random profile in which every player ranks every terminal outcome
/// above every cyclic one.
pub fn random_c0_profile(rng: &mut ChaCha8Rng, os: &OutcomeSet, players: usize) -> PreferenceProfile {
    let prefs = (0..players)
        .map(|_| {
            let mut terminal = os.terminal_ids();
            let mut cyclic = os.cyclic_ids();
            terminal.shuffle(rng);
            cyclic.shuffle(rng);
            terminal.extend(cyclic);
            Preference::from_order(terminal).unwrap()
        })
        .collect();
    PreferenceProfile::new(prefs).unwrap()
}

pub fn random_digraph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Digraph {
    let n = rng.gen_range(1..=max_vertices);
    let mut g = Digraph::new();
    for v in 0..n {
        g.add_vertex(&format!("v{v}")).unwrap();
    }
    let density: f64 = rng.gen_range(0.0..0.5);
    for t in 0..n {
        for h in 0..n {
            if rng.gen_bool(density) {
                g.add_edge(t, h);
            }
        }
    }
    g
}

pub fn random_cnf(rng: &mut ChaCha8Rng, max_vars: usize, max_clauses: usize) -> Cnf {
    let vars = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=3usize);
            (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=vars) as Lit;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    Cnf::from_clauses(vars, clauses)
}

/// Brute-force strong connectivity: `reach[u][v]` by repeated closure.
#[allow(clippy::needless_range_loop)]
pub fn reachability(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut reach = vec![vec![false; n]; n];
    for (v, row) in reach.iter_mut().enumerate() {
        row[v] = true;
    }
    for &(t, h) in g.edges() {
        reach[t][h] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Truth-table satisfiability.
pub fn truth_table_models(cnf: &Cnf) -> Vec<Vec<bool>> {
    let n = cnf.var_count();
    (0u64..1 << n)
        .map(|bits| (0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<bool>>())
        .filter(|a| {
            cnf.clauses().iter().all(|c| {
                c.iter().any(|&l| {
                    let v = a[l.unsigned_abs() as usize - 1];
                    if l > 0 {
                        v
                    } else {
                        !v
                    }
                })
            })
        })
        .collect()
}

pub fn cyclic_count(os: &OutcomeSet) -> usize {
    (0..os.len()).filter(|&o| os.kind(o) == OutcomeKind::Cyclic).count()
}
