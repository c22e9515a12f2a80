//! Game structures on digraphs, pure stationary strategies, plays and the
//! game form mapping strategy profiles to outcomes.
//!
//! Players are indexed from 0 internally and rendered from 1.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{scc_decompose, Digraph, EdgeId, GraphError, SccClass, SccDecomposition, VertexId};
use crate::CapExceeded;

pub type Player = usize;
pub type OutcomeId = usize;

/// Default upper bound on the number of normal-form cells.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("position `{0}` has no owner and is not a terminal")]
    MissingOwner(String),
    #[error("terminal `{0}` has an outgoing edge")]
    TerminalWithOutEdge(String),
    #[error("position `{0}` has no outgoing edge")]
    DeadEnd(String),
    #[error("the initial position is a terminal")]
    InitialIsTerminal,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(String),
    #[error("vertex `{0}` is both owned and terminal")]
    OwnedTerminal(String),
    #[error("position `{vertex}` is owned by player {player}, but there are only {players} players")]
    PlayerOutOfRange {
        vertex: String,
        player: usize,
        players: usize,
    },
    #[error("no initial position")]
    MissingInitial,
}

/// Renders a validation error list one per line.
pub fn format_errors(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated DG game structure: digraph, player partition, terminals and
/// the initial position, together with its SCC decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameStructure {
    graph: Digraph,
    players: usize,
    owner: Vec<Option<Player>>,
    terminal: Vec<bool>,
    initial: VertexId,
    scc: SccDecomposition,
}

impl GameStructure {
    /// Validates the parts and assembles a structure.
    ///
    /// `owner[v]` is the 0-based owner of `v`, `None` for terminals.
    pub fn new(
        graph: Digraph,
        players: usize,
        owner: Vec<Option<Player>>,
        terminal: Vec<bool>,
        initial: VertexId,
    ) -> Result<Self, Vec<ValidationError>> {
        let errors = check_parts(&graph, players, &owner, &terminal, initial);
        if !errors.is_empty() {
            return Err(errors);
        }
        let scc = scc_decompose(&graph);
        Ok(GameStructure {
            graph,
            players,
            owner,
            terminal,
            initial,
            scc,
        })
    }

    /// Re-checks every structural invariant.
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        let errors = check_parts(
            &self.graph,
            self.players,
            &self.owner,
            &self.terminal,
            self.initial,
        );
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn owner(&self, v: VertexId) -> Option<Player> {
        self.owner[v]
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.terminal[v]
    }

    pub fn terminals(&self) -> Vec<VertexId> {
        self.graph.vertices().filter(|&v| self.terminal[v]).collect()
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    pub fn scc(&self) -> &SccDecomposition {
        &self.scc
    }

    /// Positions controlled by `player`, in input order.
    pub fn positions_of(&self, player: Player) -> Vec<VertexId> {
        self.graph
            .vertices()
            .filter(|&v| self.owner[v] == Some(player))
            .collect()
    }

    /// Copy of this structure keeping only the edges for which `keep` holds.
    pub(crate) fn retain_edges(
        &self,
        keep: impl Fn(EdgeId) -> bool,
    ) -> Result<(GameStructure, Vec<EdgeId>), Vec<ValidationError>> {
        let mut graph = Digraph::new();
        for v in self.graph.vertices() {
            graph
                .add_vertex(self.graph.name(v))
                .expect("names are unique in the source graph");
        }
        let mut kept = Vec::new();
        for e in 0..self.graph.edge_count() {
            if keep(e) {
                let (t, h) = self.graph.edge(e);
                graph.add_edge(t, h);
                kept.push(e);
            }
        }
        let gs = GameStructure::new(
            graph,
            self.players,
            self.owner.clone(),
            self.terminal.clone(),
            self.initial,
        )?;
        Ok((gs, kept))
    }
}

fn check_parts(
    graph: &Digraph,
    players: usize,
    owner: &[Option<Player>],
    terminal: &[bool],
    initial: VertexId,
) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    let n = graph.vertex_count();
    assert_eq!(owner.len(), n, "owner table must cover every vertex");
    assert_eq!(terminal.len(), n, "terminal table must cover every vertex");
    for v in graph.vertices() {
        let name = graph.name(v).to_string();
        match (owner[v], terminal[v]) {
            (Some(_), true) => errors.push(ValidationError::OwnedTerminal(name.clone())),
            (None, false) => errors.push(ValidationError::MissingOwner(name.clone())),
            (Some(p), false) if p >= players => errors.push(ValidationError::PlayerOutOfRange {
                vertex: name.clone(),
                player: p.wrapping_add(1),
                players,
            }),
            _ => {}
        }
        if terminal[v] && graph.out_degree(v) > 0 {
            errors.push(ValidationError::TerminalWithOutEdge(name));
        } else if !terminal[v] && graph.out_degree(v) == 0 {
            errors.push(ValidationError::DeadEnd(name));
        }
    }
    if initial >= n {
        errors.push(ValidationError::MissingInitial);
    } else if terminal[initial] {
        errors.push(ValidationError::InitialIsTerminal);
    }
    errors
}

/// Name-based construction of a [`GameStructure`].
#[derive(Debug, Clone, Default)]
pub struct GameBuilder {
    players: usize,
    vertices: Vec<(String, Option<Player>)>,
    edges: Vec<(String, String)>,
    initial: Option<String>,
}

impl GameBuilder {
    pub fn new(players: usize) -> Self {
        GameBuilder {
            players,
            ..Default::default()
        }
    }

    /// Declares a position owned by the 1-based `player`.
    pub fn position(mut self, name: &str, player: usize) -> Self {
        self.vertices
            .push((name.to_string(), Some(player.wrapping_sub(1))));
        self
    }

    pub fn terminal(mut self, name: &str) -> Self {
        self.vertices.push((name.to_string(), None));
        self
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.initial = Some(name.to_string());
        self
    }

    pub fn edge(mut self, tail: &str, head: &str) -> Self {
        self.edges.push((tail.to_string(), head.to_string()));
        self
    }

    pub fn build(self) -> Result<GameStructure, Vec<ValidationError>> {
        let mut errors = Vec::new();
        let mut graph = Digraph::new();
        let mut owner = Vec::new();
        let mut terminal = Vec::new();
        for (name, who) in &self.vertices {
            match graph.add_vertex(name) {
                Ok(_) => {
                    owner.push(*who);
                    terminal.push(who.is_none());
                }
                Err(_) => errors.push(ValidationError::DuplicateVertex(name.clone())),
            }
        }
        for (t, h) in &self.edges {
            if let Err(GraphError::UnknownVertex(v)) = graph.add_edge_by_name(t, h) {
                errors.push(ValidationError::UnknownVertex(v));
            }
        }
        let initial = match &self.initial {
            None => {
                errors.push(ValidationError::MissingInitial);
                None
            }
            Some(name) => match graph.vertex(name) {
                Some(v) => Some(v),
                None => {
                    errors.push(ValidationError::UnknownVertex(name.clone()));
                    None
                }
            },
        };
        let structural = match initial {
            Some(v) => check_parts(&graph, self.players, &owner, &terminal, v),
            None => check_parts(&graph, self.players, &owner, &terminal, usize::MAX)
                .into_iter()
                .filter(|e| *e != ValidationError::MissingInitial)
                .collect(),
        };
        errors.extend(structural);
        if !errors.is_empty() {
            return Err(errors);
        }
        GameStructure::new(graph, self.players, owner, terminal, initial.unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    /// A terminal SCC: no move leaves it.
    Terminal,
    /// An inner SCC: contains a dicycle and can be left.
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    pub kind: OutcomeKind,
    /// SCC indices identified with this outcome; more than one after merging.
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OutcomeError {
    #[error("`{label}` does not name an inner or terminal strongly connected component")]
    LabelMismatch { label: String },
    #[error("outcome label `{0}` is used twice")]
    DuplicateLabel(String),
    #[error("component labeled `{label}` already carries label `{previous}`")]
    ComponentLabeledTwice { label: String, previous: String },
    #[error("label `{0}` merges terminal and cyclic components")]
    MixedMerge(String),
}

/// The outcome set of a game structure: one outcome per non-transient SCC,
/// or fewer when several components are merged under one label.
///
/// Outcomes are ordered by the smallest SCC index they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSet {
    outcomes: Vec<Outcome>,
    by_component: Vec<Option<OutcomeId>>,
}

impl OutcomeSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn get(&self, id: OutcomeId) -> &Outcome {
        &self.outcomes[id]
    }

    pub fn label(&self, id: OutcomeId) -> &str {
        &self.outcomes[id].label
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|o| o.label.as_str()).collect()
    }

    pub fn kind(&self, id: OutcomeId) -> OutcomeKind {
        self.outcomes[id].kind
    }

    pub fn find(&self, label: &str) -> Option<OutcomeId> {
        self.outcomes.iter().position(|o| o.label == label)
    }

    pub fn terminal_ids(&self) -> Vec<OutcomeId> {
        self.ids_of(OutcomeKind::Terminal)
    }

    pub fn cyclic_ids(&self) -> Vec<OutcomeId> {
        self.ids_of(OutcomeKind::Cyclic)
    }

    fn ids_of(&self, kind: OutcomeKind) -> Vec<OutcomeId> {
        (0..self.len()).filter(|&o| self.kind(o) == kind).collect()
    }

    /// Outcome realized by plays ending in component `j`; `None` for
    /// transient components.
    pub fn outcome_of_component(&self, j: usize) -> Option<OutcomeId> {
        self.by_component[j]
    }

    /// Maps each outcome of `self` to the outcome of `coarser` containing it.
    ///
    /// `coarser` must be obtained from the same structure by merging.
    pub fn map_into(&self, coarser: &OutcomeSet) -> Vec<OutcomeId> {
        self.outcomes
            .iter()
            .map(|o| {
                coarser.by_component[o.components[0]]
                    .expect("coarser outcome set covers every non-transient component")
            })
            .collect()
    }

    /// Builds the outcome set with explicit labels for some components.
    ///
    /// Each `(label, vertices)` pair must name exactly the vertex set of a
    /// terminal or inner SCC. Reusing a label on several components merges
    /// them into one outcome. Unlabeled terminal vertices are named after
    /// themselves; other unlabeled outcomes get `c1, c2, ...` by SCC index.
    pub fn with_labels(
        gs: &GameStructure,
        labels: &[(String, Vec<VertexId>)],
    ) -> Result<OutcomeSet, OutcomeError> {
        let scc = gs.scc();
        let mut assigned: Vec<Option<String>> = vec![None; scc.len()];
        for (label, vertices) in labels {
            let mut sorted = vertices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let j = sorted
                .first()
                .map(|&v| scc.component_of(v))
                .filter(|&j| scc.component(j) == sorted.as_slice())
                .filter(|&j| scc.class(j) != SccClass::Transient)
                .ok_or_else(|| OutcomeError::LabelMismatch {
                    label: label.clone(),
                })?;
            if let Some(previous) = &assigned[j] {
                return Err(OutcomeError::ComponentLabeledTwice {
                    label: label.clone(),
                    previous: previous.clone(),
                });
            }
            assigned[j] = Some(label.clone());
        }

        let mut cyclic_counter = 0usize;
        let mut outcomes: Vec<Outcome> = Vec::new();
        let mut by_component = vec![None; scc.len()];
        let mut explicit: Vec<(String, OutcomeId)> = Vec::new();
        for j in 0..scc.len() {
            let kind = match scc.class(j) {
                SccClass::Transient => continue,
                SccClass::Terminal => OutcomeKind::Terminal,
                SccClass::Inner => OutcomeKind::Cyclic,
            };
            let members = scc.component(j);
            let terminal_vertex = members.len() == 1 && gs.is_terminal(members[0]);
            if !terminal_vertex {
                cyclic_counter += 1;
            }
            let id = match &assigned[j] {
                Some(label) => {
                    if let Some(&(_, id)) = explicit.iter().find(|(l, _)| l == label) {
                        if outcomes[id].kind != kind {
                            return Err(OutcomeError::MixedMerge(label.clone()));
                        }
                        outcomes[id].components.push(j);
                        by_component[j] = Some(id);
                        continue;
                    }
                    explicit.push((label.clone(), outcomes.len()));
                    label.clone()
                }
                None if terminal_vertex => gs.graph().name(members[0]).to_string(),
                None => format!("c{cyclic_counter}"),
            };
            by_component[j] = Some(outcomes.len());
            outcomes.push(Outcome {
                label: id,
                kind,
                components: vec![j],
            });
        }
        for (i, o) in outcomes.iter().enumerate() {
            if outcomes[..i].iter().any(|p| p.label == o.label) {
                return Err(OutcomeError::DuplicateLabel(o.label.clone()));
            }
        }
        Ok(OutcomeSet {
            outcomes,
            by_component,
        })
    }

    /// Replaces every cyclic outcome by one outcome labeled `c`, placed at
    /// the position of the first cyclic outcome.
    pub fn merged_cyclic(&self) -> Option<OutcomeSet> {
        let cyclic = self.cyclic_ids();
        let first = *cyclic.first()?;
        let mut label = "c".to_string();
        while self
            .outcomes
            .iter()
            .any(|o| o.kind == OutcomeKind::Terminal && o.label == label)
        {
            label.push('\'');
        }
        let mut outcomes = Vec::new();
        let mut old_to_new = vec![0; self.len()];
        for (id, o) in self.outcomes.iter().enumerate() {
            match o.kind {
                OutcomeKind::Terminal => {
                    old_to_new[id] = outcomes.len();
                    outcomes.push(o.clone());
                }
                OutcomeKind::Cyclic if id == first => {
                    old_to_new[id] = outcomes.len();
                    let mut components: Vec<usize> = cyclic
                        .iter()
                        .flat_map(|&c| self.outcomes[c].components.iter().copied())
                        .collect();
                    components.sort_unstable();
                    outcomes.push(Outcome {
                        label: label.clone(),
                        kind: OutcomeKind::Cyclic,
                        components,
                    });
                }
                OutcomeKind::Cyclic => old_to_new[id] = old_to_new[first],
            }
        }
        let by_component = self
            .by_component
            .iter()
            .map(|o| o.map(|id| old_to_new[id]))
            .collect();
        Some(OutcomeSet {
            outcomes,
            by_component,
        })
    }
}

/// The default outcome set of `gs`.
pub fn build_outcomes(gs: &GameStructure) -> OutcomeSet {
    OutcomeSet::with_labels(gs, &[]).expect("default labels never conflict")
}

/// A pure stationary strategy: one chosen edge per owned position, listed
/// in the player's position order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub player: Player,
    pub moves: Vec<EdgeId>,
}

impl Strategy {
    /// `(s1->u2, u1->v1)` style rendering.
    pub fn display<'a>(&'a self, g: &'a Digraph) -> impl fmt::Display + 'a {
        DisplayStrategy { s: self, g }
    }
}

struct DisplayStrategy<'a> {
    s: &'a Strategy,
    g: &'a Digraph,
}

impl fmt::Display for DisplayStrategy<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, &e) in self.s.moves.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&self.g.edge_label(e))?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub strategies: Vec<Strategy>,
}

impl StrategyProfile {
    /// Whether every strategy belongs to the right player and picks an
    /// outgoing edge of each of that player's positions.
    pub fn is_valid_for(&self, gs: &GameStructure) -> bool {
        self.strategies.len() == gs.players()
            && self.strategies.iter().enumerate().all(|(i, s)| {
                let positions = gs.positions_of(i);
                s.player == i
                    && s.moves.len() == positions.len()
                    && s.moves.iter().zip(&positions).all(|(&e, &v)| {
                        e < gs.graph().edge_count() && gs.graph().edge(e).0 == v
                    })
            })
    }

    /// Successor chosen at every vertex; terminals map to themselves.
    fn successor_table(&self, gs: &GameStructure) -> Vec<VertexId> {
        let g = gs.graph();
        let mut next: Vec<VertexId> = g.vertices().collect();
        for s in &self.strategies {
            for &e in &s.moves {
                let (t, h) = g.edge(e);
                next[t] = h;
            }
        }
        next
    }

    pub fn display<'a>(&'a self, g: &'a Digraph) -> String {
        self.strategies
            .iter()
            .map(|s| s.display(g).to_string())
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// Enumeration of every player's strategies in lexicographic order:
/// positions in input vertex order, the first position most significant,
/// and each position's moves in input edge order.
#[derive(Debug, Clone)]
pub struct StrategySpace {
    positions: Vec<Vec<VertexId>>,
    counts: Vec<usize>,
}

impl StrategySpace {
    pub fn new(gs: &GameStructure) -> Self {
        let positions: Vec<Vec<VertexId>> = (0..gs.players()).map(|i| gs.positions_of(i)).collect();
        let counts = positions
            .iter()
            .map(|ps| {
                ps.iter()
                    .map(|&v| gs.graph().out_degree(v))
                    .try_fold(1usize, |acc, d| acc.checked_mul(d))
                    .unwrap_or(usize::MAX)
            })
            .collect();
        StrategySpace { positions, counts }
    }

    pub fn players(&self) -> usize {
        self.counts.len()
    }

    /// Number of strategies of `player` (saturating).
    pub fn count(&self, player: Player) -> usize {
        self.counts[player]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn positions(&self, player: Player) -> &[VertexId] {
        &self.positions[player]
    }

    /// Size of the full profile space, `None` on overflow.
    pub fn total(&self) -> Option<usize> {
        self.counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
    }

    pub fn strategy(&self, gs: &GameStructure, player: Player, index: usize) -> Strategy {
        let mut moves = vec![0; self.positions[player].len()];
        self.write_moves(gs, player, index, |slot, e| moves[slot] = e);
        Strategy { player, moves }
    }

    fn write_moves(
        &self,
        gs: &GameStructure,
        player: Player,
        mut index: usize,
        mut put: impl FnMut(usize, EdgeId),
    ) {
        let ps = &self.positions[player];
        for slot in (0..ps.len()).rev() {
            let out = gs.graph().out_edges(ps[slot]);
            put(slot, out[index % out.len()]);
            index /= out.len();
        }
    }

    /// Inverse of [`StrategySpace::strategy`].
    pub fn index_of(&self, gs: &GameStructure, s: &Strategy) -> Option<usize> {
        let ps = self.positions.get(s.player)?;
        if ps.len() != s.moves.len() {
            return None;
        }
        let mut index = 0usize;
        for (&v, &e) in ps.iter().zip(&s.moves) {
            let out = gs.graph().out_edges(v);
            let k = out.iter().position(|&x| x == e)?;
            index = index * out.len() + k;
        }
        Some(index)
    }

    pub fn profile(&self, gs: &GameStructure, indices: &[usize]) -> StrategyProfile {
        StrategyProfile {
            strategies: indices
                .iter()
                .enumerate()
                .map(|(i, &k)| self.strategy(gs, i, k))
                .collect(),
        }
    }

    pub fn profile_indices(&self, gs: &GameStructure, x: &StrategyProfile) -> Option<Vec<usize>> {
        x.strategies.iter().map(|s| self.index_of(gs, s)).collect()
    }

    /// Writes the successor chosen by strategy `index` of `player` into `next`.
    pub(crate) fn apply(&self, gs: &GameStructure, player: Player, index: usize, next: &mut [VertexId]) {
        let ps = &self.positions[player];
        self.write_moves(gs, player, index, |slot, e| next[ps[slot]] = gs.graph().edge(e).1);
    }
}

/// All strategies of `player`, in lexicographic order.
pub fn strategies(gs: &GameStructure, player: Player) -> Vec<Strategy> {
    let space = StrategySpace::new(gs);
    (0..space.count(player))
        .map(|k| space.strategy(gs, player, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Terminus {
    /// The play stops at a terminal vertex.
    TerminalVertex(VertexId),
    /// The play repeats this dicycle forever, starting at the first
    /// repeated vertex.
    Cycle(Vec<VertexId>),
}

/// The lasso generated by a strategy profile from the initial position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Play {
    /// Vertices visited before the terminal vertex or the cycle.
    pub prefix: Vec<VertexId>,
    pub terminus: Terminus,
}

impl Play {
    /// The vertex whose SCC decides the outcome.
    pub fn anchor(&self) -> VertexId {
        match &self.terminus {
            Terminus::TerminalVertex(v) => *v,
            Terminus::Cycle(c) => c[0],
        }
    }

    /// The cycle rotated to start at its smallest vertex id.
    pub fn canonical_cycle(&self) -> Option<Vec<VertexId>> {
        match &self.terminus {
            Terminus::TerminalVertex(_) => None,
            Terminus::Cycle(c) => {
                let start = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
                Some(c[start..].iter().chain(&c[..start]).copied().collect())
            }
        }
    }

    pub fn display(&self, g: &Digraph) -> String {
        let names = |vs: &[VertexId]| vs.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(" ");
        match &self.terminus {
            Terminus::TerminalVertex(t) => {
                format!("[{}] -> {}", names(&self.prefix), g.name(*t))
            }
            Terminus::Cycle(c) => format!("[{}] -> cycle ({})", names(&self.prefix), names(c)),
        }
    }
}

fn walk(gs: &GameStructure, next: &[VertexId]) -> Play {
    let mut seen_at = vec![usize::MAX; next.len()];
    let mut path = Vec::new();
    let mut v = gs.initial();
    loop {
        if gs.is_terminal(v) {
            return Play {
                prefix: path,
                terminus: Terminus::TerminalVertex(v),
            };
        }
        if seen_at[v] != usize::MAX {
            let cycle = path.split_off(seen_at[v]);
            return Play {
                prefix: path,
                terminus: Terminus::Cycle(cycle),
            };
        }
        seen_at[v] = path.len();
        path.push(v);
        v = next[v];
    }
}

/// Follows the profile from the initial position until a terminal is
/// reached or a vertex repeats.
pub fn play(gs: &GameStructure, x: &StrategyProfile) -> Play {
    debug_assert!(x.is_valid_for(gs));
    walk(gs, &x.successor_table(gs))
}

/// The game form `g(x)`.
pub fn outcome_of(gs: &GameStructure, os: &OutcomeSet, x: &StrategyProfile) -> OutcomeId {
    let p = play(gs, x);
    component_outcome(gs, os, p.anchor())
}

fn component_outcome(gs: &GameStructure, os: &OutcomeSet, v: VertexId) -> OutcomeId {
    os.outcome_of_component(gs.scc().component_of(v))
        .expect("plays never end in a transient component")
}

/// Scratch state for evaluating many profiles without reallocating.
pub(crate) struct Walker {
    next: Vec<VertexId>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Walker {
    pub(crate) fn new(gs: &GameStructure) -> Self {
        let n = gs.graph().vertex_count();
        Walker {
            next: (0..n).collect(),
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    pub(crate) fn set(&mut self, space: &StrategySpace, gs: &GameStructure, indices: &[usize]) {
        for (i, &k) in indices.iter().enumerate() {
            space.apply(gs, i, k, &mut self.next);
        }
    }

    pub(crate) fn set_player(&mut self, space: &StrategySpace, gs: &GameStructure, player: Player, k: usize) {
        space.apply(gs, player, k, &mut self.next);
    }

    pub(crate) fn outcome(&mut self, gs: &GameStructure, os: &OutcomeSet) -> OutcomeId {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let mut v = gs.initial();
        while !gs.is_terminal(v) && self.stamp[v] != self.epoch {
            self.stamp[v] = self.epoch;
            v = self.next[v];
        }
        component_outcome(gs, os, v)
    }
}

/// Dense table of `g` over the product of the players' strategy lists,
/// player 1's strategy the most significant coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    shape: Vec<usize>,
    cells: Vec<OutcomeId>,
}

impl NormalForm {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[OutcomeId] {
        &self.cells
    }

    pub fn outcome(&self, index: usize) -> OutcomeId {
        self.cells[index]
    }

    pub fn at(&self, coords: &[usize]) -> OutcomeId {
        self.cells[self.index(coords)]
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.shape.len()];
        for (c, &n) in coords.iter_mut().zip(&self.shape).rev() {
            *c = index % n;
            index /= n;
        }
        coords
    }

    /// Distance in the flat index between strategies `k` and `k + 1` of `player`.
    pub fn stride(&self, player: Player) -> usize {
        self.shape[player + 1..].iter().product()
    }

    /// Relabels every cell through `map` (e.g. into a merged outcome set).
    pub fn map_outcomes(&self, map: &[OutcomeId]) -> NormalForm {
        NormalForm {
            shape: self.shape.clone(),
            cells: self.cells.iter().map(|&o| map[o]).collect(),
        }
    }
}

/// Computes the full normal form, refusing spaces larger than `cap` cells.
pub fn normal_form(gs: &GameStructure, os: &OutcomeSet, cap: usize) -> Result<NormalForm, CapExceeded> {
    let space = StrategySpace::new(gs);
    let total = space
        .total()
        .filter(|&t| t <= cap)
        .ok_or_else(|| CapExceeded::new("normal-form cells", space.total(), cap))?;
    let shape = space.counts().to_vec();
    let shape_ref = &shape;
    let cells = (0..total)
        .into_par_iter()
        .map_init(
            || (Walker::new(gs), vec![0usize; shape_ref.len()]),
            |(walker, coords), mut index| {
                for (c, &n) in coords.iter_mut().zip(shape_ref).rev() {
                    *c = index % n;
                    index /= n;
                }
                walker.set(&space, gs, coords);
                walker.outcome(gs, os)
            },
        )
        .collect();
    Ok(NormalForm { shape, cells })
}
