//! Nash equilibria in pure stationary strategies.
//!
//! Deviation checks scan the deviator's whole strategy list. Brute-force
//! search over preference profiles works from per-cell bitmasks of the
//! outcomes each player can force by deviating, which keeps it independent
//! of the SAT encoding it is used to cross-check.

use std::collections::HashMap;
use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::game::{
    normal_form, outcome_of, GameStructure, NormalForm, OutcomeId, OutcomeSet, Player, Strategy,
    StrategyProfile, StrategySpace, Walker,
};
use crate::graph::{EdgeId, SccClass, VertexId};
use crate::preference::{cnd_c0, enumerate_preference_profiles, PreferenceProfile};
use crate::CapExceeded;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    CapExceeded(#[from] CapExceeded),
    #[error("{0} outcomes exceed the 64 supported by the bitmask search")]
    TooManyOutcomes(usize),
    #[error("the game is not play-once")]
    NotPlayOnce,
    #[error("condition C0 does not hold")]
    ConditionC0Fails,
    #[error("no terminal component is reachable from the initial position")]
    NoTerminalReachable,
    #[error("no Nash equilibrium found: the play-once C0 construction and the exhaustive fallback both failed")]
    NoNEFound,
}

/// A player who can strictly improve on a profile, with the
/// lexicographically first improving strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Improvement {
    pub player: Player,
    pub witness: Strategy,
    pub outcome: OutcomeId,
}

/// Every player with a strictly improving unilateral deviation from `x`.
pub fn improving_players(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
    x: &StrategyProfile,
) -> Vec<Improvement> {
    let space = StrategySpace::new(gs);
    let indices = space
        .profile_indices(gs, x)
        .expect("profile must be valid for the game");
    let mut walker = Walker::new(gs);
    walker.set(&space, gs, &indices);
    let current = walker.outcome(gs, os);
    let mut found = Vec::new();
    for (i, &own) in indices.iter().enumerate() {
        for k in 0..space.count(i) {
            if k == own {
                continue;
            }
            walker.set_player(&space, gs, i, k);
            let o = walker.outcome(gs, os);
            if pp.get(i).better(o, current) {
                found.push(Improvement {
                    player: i,
                    witness: space.strategy(gs, i, k),
                    outcome: o,
                });
                break;
            }
        }
        walker.set_player(&space, gs, i, own);
    }
    found
}

/// Whether no player can strictly improve on `x` by a unilateral switch.
pub fn is_ne(gs: &GameStructure, os: &OutcomeSet, pp: &PreferenceProfile, x: &StrategyProfile) -> bool {
    let current = outcome_of(gs, os, x);
    let space = StrategySpace::new(gs);
    (0..gs.players()).all(|i| {
        (0..space.count(i)).all(|k| {
            let mut y = x.clone();
            y.strategies[i] = space.strategy(gs, i, k);
            !pp.get(i).better(outcome_of(gs, os, &y), current)
        })
    })
}

/// Whether normal-form cell `index` is an equilibrium under `pp`.
fn cell_is_ne(nf: &NormalForm, pp: &PreferenceProfile, index: usize) -> bool {
    let coords = nf.coords(index);
    let current = nf.outcome(index);
    (0..nf.shape().len()).all(|i| {
        let stride = nf.stride(i);
        let base = index - coords[i] * stride;
        (0..nf.shape()[i]).all(|k| !pp.get(i).better(nf.outcome(base + k * stride), current))
    })
}

/// Indices of all equilibrium cells of a precomputed normal form.
pub fn ne_cells(nf: &NormalForm, pp: &PreferenceProfile) -> Vec<usize> {
    (0..nf.len())
        .into_par_iter()
        .filter(|&c| cell_is_ne(nf, pp, c))
        .collect()
}

/// Every equilibrium profile in lexicographic order. Empty means the game
/// is NE-free under `pp`.
pub fn all_ne(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
    cap: usize,
) -> Result<Vec<StrategyProfile>, CapExceeded> {
    let nf = normal_form(gs, os, cap)?;
    let space = StrategySpace::new(gs);
    Ok(ne_cells(&nf, pp)
        .into_iter()
        .map(|c| space.profile(gs, &nf.coords(c)))
        .collect())
}

/// A normal-form cell with its outcome and improving players.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellAnnotation {
    pub index: usize,
    pub coords: Vec<usize>,
    pub outcome: OutcomeId,
    /// `(player, witness strategy index, outcome after deviating)`, by player.
    pub improvements: Vec<(Player, usize, OutcomeId)>,
}

impl CellAnnotation {
    pub fn improvers(&self) -> Vec<Player> {
        self.improvements.iter().map(|&(p, _, _)| p).collect()
    }
}

/// Annotates every cell of `nf` with its improving players, each with the
/// lexicographically first improving strategy.
pub fn annotate(nf: &NormalForm, pp: &PreferenceProfile) -> Vec<CellAnnotation> {
    (0..nf.len())
        .into_par_iter()
        .map(|index| {
            let coords = nf.coords(index);
            let current = nf.outcome(index);
            let improvements = (0..coords.len())
                .filter_map(|i| {
                    let stride = nf.stride(i);
                    let base = index - coords[i] * stride;
                    (0..nf.shape()[i]).find_map(|k| {
                        let o = nf.outcome(base + k * stride);
                        pp.get(i).better(o, current).then_some((i, k, o))
                    })
                })
                .collect();
            CellAnnotation {
                index,
                coords,
                outcome: current,
                improvements,
            }
        })
        .collect()
}

/// For every distinct cell signature, the cell outcome and, per player, the
/// bitmask of outcomes reachable by a unilateral deviation.
#[derive(Debug, Clone)]
pub struct DeviationTable {
    players: usize,
    outcomes: usize,
    /// `(outcome, mask player 0, mask player 1, ...)` flattened.
    rows: Vec<u64>,
}

impl DeviationTable {
    pub fn new(nf: &NormalForm, outcomes: usize) -> Result<Self, EquilibriumError> {
        if outcomes > 64 {
            return Err(EquilibriumError::TooManyOutcomes(outcomes));
        }
        let players = nf.shape().len();
        let width = players + 1;
        let mut rows: Vec<u64> = Vec::new();
        let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
        for index in 0..nf.len() {
            let coords = nf.coords(index);
            let mut row = vec![nf.outcome(index) as u64];
            for (i, &k) in coords.iter().enumerate() {
                let stride = nf.stride(i);
                let base = index - k * stride;
                let mask = (0..nf.shape()[i]).fold(0u64, |m, k| m | 1 << nf.outcome(base + k * stride));
                row.push(mask);
            }
            if seen.insert(row.clone(), ()).is_none() {
                rows.extend(row);
            }
        }
        debug_assert_eq!(rows.len() % width, 0);
        Ok(DeviationTable { players, outcomes, rows })
    }

    pub fn distinct_cells(&self) -> usize {
        self.rows.len() / (self.players + 1)
    }

    /// Whether some cell is an equilibrium under the orders given as
    /// `better[i][o]` = mask of outcomes player `i` strictly prefers to `o`.
    fn has_ne(&self, better: &[u64]) -> bool {
        self.rows.chunks_exact(self.players + 1).any(|row| {
            let o = row[0] as usize;
            row[1..]
                .iter()
                .enumerate()
                .all(|(i, &mask)| mask & better[i * self.outcomes + o] == 0)
        })
    }
}

/// Caps for [`brute_force_ne_free_profiles`].
#[derive(Debug, Clone, Copy)]
pub struct SearchCaps {
    pub cells: usize,
    pub profiles: usize,
    /// Bound on profiles × cells.
    pub work: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            cells: crate::game::DEFAULT_CELL_CAP,
            profiles: crate::preference::DEFAULT_PROFILE_CAP,
            work: 100_000_000_000,
        }
    }
}

fn ne_free_indices(
    gs: &GameStructure,
    os: &OutcomeSet,
    caps: SearchCaps,
) -> Result<(crate::preference::ProfileEnumeration, Vec<usize>), EquilibriumError> {
    let nf = normal_form(gs, os, caps.cells)?;
    let profiles = enumerate_preference_profiles(os.len(), gs.players(), caps.profiles)?;
    let work = profiles.len().checked_mul(nf.len());
    if work.is_none_or(|w| w > caps.work) {
        return Err(CapExceeded::new("profiles x cells", work, caps.work).into());
    }
    let table = DeviationTable::new(&nf, os.len())?;
    let k = os.len();
    let n = gs.players();
    let per_player = profiles.per_player();
    let perms: Vec<Vec<u64>> = (0..per_player)
        .map(|d| {
            let order = crate::preference::permutation_at(k, d);
            let mut better = vec![0u64; k];
            let mut above = 0u64;
            for &o in &order {
                better[o] = above;
                above |= 1 << o;
            }
            better
        })
        .collect();
    let found = (0..profiles.len())
        .into_par_iter()
        .map_init(
            || vec![0u64; n * k],
            |better, mut index| {
                for i in (0..n).rev() {
                    let d = index % per_player;
                    index /= per_player;
                    better[i * k..(i + 1) * k].copy_from_slice(&perms[d]);
                }
                !table.has_ne(better)
            },
        )
        .enumerate()
        .filter_map(|(idx, free)| free.then_some(idx))
        .collect();
    Ok((profiles, found))
}

/// All preference profiles under which the game has no equilibrium, in
/// enumeration order.
pub fn brute_force_ne_free_profiles(
    gs: &GameStructure,
    os: &OutcomeSet,
    caps: SearchCaps,
) -> Result<Vec<PreferenceProfile>, EquilibriumError> {
    let (profiles, found) = ne_free_indices(gs, os, caps)?;
    Ok(found.into_iter().map(|i| profiles.profile(i)).collect())
}

pub fn brute_force_ne_free_count(
    gs: &GameStructure,
    os: &OutcomeSet,
    caps: SearchCaps,
) -> Result<usize, EquilibriumError> {
    Ok(ne_free_indices(gs, os, caps)?.1.len())
}

/// Edges kept after dropping all but the best terminal move at each position.
fn kept_after_terminal_pruning(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
) -> Vec<bool> {
    let g = gs.graph();
    let mut keep = vec![true; g.edge_count()];
    for v in g.vertices() {
        let Some(owner) = gs.owner(v) else { continue };
        let terminal_moves: Vec<EdgeId> = g
            .out_edges(v)
            .iter()
            .copied()
            .filter(|&e| gs.is_terminal(g.edge(e).1))
            .collect();
        if terminal_moves.len() < 2 {
            continue;
        }
        let outcome = |e: EdgeId| {
            os.outcome_of_component(gs.scc().component_of(g.edge(e).1))
                .expect("terminal vertices are outcomes")
        };
        let best = terminal_moves
            .iter()
            .copied()
            .reduce(|a, b| if pp.get(owner).better(outcome(b), outcome(a)) { b } else { a })
            .expect("at least two moves");
        for e in terminal_moves {
            keep[e] = e == best;
        }
    }
    keep
}

fn reduce_terminal_moves(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
) -> (GameStructure, Vec<EdgeId>) {
    let keep = kept_after_terminal_pruning(gs, os, pp);
    gs.retain_edges(|e| keep[e])
        .expect("pruning keeps one move per position")
}

fn in_terminal_component(gs: &GameStructure, v: VertexId) -> bool {
    gs.scc().class(gs.scc().component_of(v)) == SccClass::Terminal
}

/// The vertex of a terminal component reached from `w` through forced moves
/// only, if any.
fn forced_terminal(gs: &GameStructure, keep: &[bool], mut w: VertexId) -> Option<VertexId> {
    let g = gs.graph();
    for _ in 0..=g.vertex_count() {
        if in_terminal_component(gs, w) {
            return Some(w);
        }
        let mut moves = g.out_edges(w).iter().filter(|&&e| keep[e]);
        match (moves.next(), moves.next()) {
            (Some(&e), None) => w = g.edge(e).1,
            _ => return None,
        }
    }
    None
}

/// Terminal pruning where a move into a terminal component, or into a chain
/// of forced moves ending in one, counts as a terminal move; repeated until
/// nothing changes.
fn kept_after_contracted_pruning(gs: &GameStructure, os: &OutcomeSet, pp: &PreferenceProfile) -> Vec<bool> {
    let g = gs.graph();
    let mut keep = vec![true; g.edge_count()];
    loop {
        let mut changed = false;
        for v in g.vertices() {
            let Some(owner) = gs.owner(v) else { continue };
            if in_terminal_component(gs, v) {
                continue;
            }
            let terminal_moves: Vec<(EdgeId, OutcomeId)> = g
                .out_edges(v)
                .iter()
                .copied()
                .filter(|&e| keep[e])
                .filter_map(|e| {
                    let t = forced_terminal(gs, &keep, g.edge(e).1)?;
                    let o = os
                        .outcome_of_component(gs.scc().component_of(t))
                        .expect("terminal components are outcomes");
                    Some((e, o))
                })
                .collect();
            if terminal_moves.len() < 2 {
                continue;
            }
            let best = terminal_moves
                .iter()
                .copied()
                .reduce(|a, b| if pp.get(owner).better(b.1, a.1) { b } else { a })
                .expect("at least two moves");
            for (e, _) in terminal_moves {
                if e != best.0 {
                    keep[e] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return keep;
        }
    }
}

/// Keeps, at each position with several moves into terminals, only the
/// move to the terminal its owner likes best (the first such edge on ties).
pub fn delete_bad_terminal_moves(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
) -> GameStructure {
    reduce_terminal_moves(gs, os, pp).0
}

/// Every player controls exactly one position.
pub fn is_play_once(gs: &GameStructure) -> bool {
    let mut owned = vec![0usize; gs.players()];
    for v in gs.graph().vertices() {
        if let Some(p) = gs.owner(v) {
            owned[p] += 1;
        }
    }
    owned.iter().all(|&c| c == 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayOnceSolution {
    pub profile: StrategyProfile,
    /// The direct construction failed verification and the exhaustive
    /// search supplied the profile.
    pub fallback: bool,
}

/// Builds an equilibrium of a play-once game satisfying C0.
///
/// Bad terminal moves are pruned, treating a move into a chain of forced
/// moves as a move to the terminal at its end, until no position keeps two
/// terminal moves; a move into a terminal component counts as a terminal
/// move. Positions on a shortest play into a terminal component then follow
/// it, and every other position takes its first non-terminal move (or its
/// only move). The result is checked with [`is_ne`] on the original game;
/// if the check fails the first equilibrium found by exhaustive search is
/// returned instead.
pub fn construct_ne_play_once_c0(
    gs: &GameStructure,
    os: &OutcomeSet,
    pp: &PreferenceProfile,
    cap: usize,
) -> Result<PlayOnceSolution, EquilibriumError> {
    if !is_play_once(gs) {
        return Err(EquilibriumError::NotPlayOnce);
    }
    if !cnd_c0(os, pp) {
        return Err(EquilibriumError::ConditionC0Fails);
    }
    let pruned = kept_after_contracted_pruning(gs, os, pp);
    let (reduced, kept) = gs
        .retain_edges(|e| pruned[e])
        .expect("pruning keeps one move per position");
    let g = reduced.graph();
    let all_kept = vec![true; g.edge_count()];

    // BFS in out-edge order; the first dequeued vertex whose forced moves
    // lead into a terminal component ends the shortest terminal play.
    let mut parent: Vec<Option<EdgeId>> = vec![None; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([reduced.initial()]);
    seen[reduced.initial()] = true;
    let mut target = None;
    while let Some(v) = queue.pop_front() {
        if forced_terminal(&reduced, &all_kept, v).is_some() {
            target = Some(v);
            break;
        }
        for &e in g.out_edges(v) {
            let w = g.edge(e).1;
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    let target = target.ok_or(EquilibriumError::NoTerminalReachable)?;

    let mut choice: Vec<Option<EdgeId>> = vec![None; g.vertex_count()];
    let mut v: VertexId = target;
    while let Some(e) = parent[v] {
        let tail = g.edge(e).0;
        choice[tail] = Some(e);
        v = tail;
    }
    for v in g.vertices() {
        if reduced.is_terminal(v) || choice[v].is_some() {
            continue;
        }
        let out = g.out_edges(v);
        let e = out
            .iter()
            .copied()
            .find(|&e| forced_terminal(&reduced, &all_kept, g.edge(e).1).is_none())
            .unwrap_or(out[0]);
        choice[v] = Some(e);
    }

    let profile = StrategyProfile {
        strategies: (0..gs.players())
            .map(|i| Strategy {
                player: i,
                moves: gs
                    .positions_of(i)
                    .iter()
                    .map(|&v| kept[choice[v].expect("every position chooses")])
                    .collect(),
            })
            .collect(),
    };
    if is_ne(gs, os, pp, &profile) {
        return Ok(PlayOnceSolution {
            profile,
            fallback: false,
        });
    }
    all_ne(gs, os, pp, cap)?
        .into_iter()
        .next()
        .map(|profile| PlayOnceSolution {
            profile,
            fallback: true,
        })
        .ok_or(EquilibriumError::NoNEFound)
}
