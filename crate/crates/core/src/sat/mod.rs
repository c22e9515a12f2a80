//! CNF encoding of "some preference profile leaves this game without a
//! Nash equilibrium".
//!
//! One variable per player and unordered outcome pair `{a, b}` with `a`
//! before `b` in the outcome list; the positive literal means the player
//! prefers `a` to `b`. A directed preference "`x` over `y`" is therefore the
//! positive literal when `x < y` and the negative one otherwise.
//!
//! The acyclicity part forbids every directed 3-cycle, which is enough:
//! a tournament with a dicycle has a 3-dicycle. The two cyclic orientations
//! of an outcome triple give two clauses (rotations coincide), so there are
//! `2 * n * C(k, 3)` of them. The NE-free part has one clause per
//! situation, asserting that some player prefers the outcome of one of
//! their outcome-changing deviations.

mod dimacs;
mod solver;

pub use dimacs::{parse_dimacs, parse_model, to_dimacs, DimacsError};
pub use solver::{enumerate_models, solve, Models, SolveResult};

use thiserror::Error;

use crate::game::{normal_form, GameStructure, OutcomeId, OutcomeSet, Player};
use crate::preference::{Preference, PreferenceProfile};
use crate::CapExceeded;

/// A literal in DIMACS convention: `v` or `-v` for variable `v >= 1`.
pub type Lit = i32;

/// The preference variable of `player` over the canonical pair `low < high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrefVar {
    pub player: Player,
    pub low: OutcomeId,
    pub high: OutcomeId,
}

/// Bijection between preference variables and `1..=count`, player-major,
/// pairs in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    players: usize,
    labels: Vec<String>,
}

impl VarMap {
    pub fn new(players: usize, labels: Vec<String>) -> Self {
        VarMap { players, labels }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn outcomes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn pairs(&self) -> usize {
        let k = self.outcomes();
        k * k.saturating_sub(1) / 2
    }

    pub fn count(&self) -> usize {
        self.players * self.pairs()
    }

    /// Variable index for `player` and the unordered pair `{a, b}`.
    pub fn var(&self, player: Player, a: OutcomeId, b: OutcomeId) -> usize {
        assert!(a != b, "no variable for a pair with itself");
        let (lo, hi) = (a.min(b), a.max(b));
        let k = self.outcomes();
        let offset = lo * (2 * k - lo - 1) / 2;
        player * self.pairs() + offset + (hi - lo - 1) + 1
    }

    /// Literal asserting that `player` strictly prefers `better` to `worse`.
    pub fn prefers(&self, player: Player, better: OutcomeId, worse: OutcomeId) -> Lit {
        let v = self.var(player, better, worse) as Lit;
        if better < worse {
            v
        } else {
            -v
        }
    }

    pub fn decode(&self, var: usize) -> PrefVar {
        assert!(var >= 1 && var <= self.count(), "variable {var} out of range");
        let index = var - 1;
        let player = index / self.pairs();
        let mut rest = index % self.pairs();
        let k = self.outcomes();
        let mut low = 0;
        while rest >= k - low - 1 {
            rest -= k - low - 1;
            low += 1;
        }
        PrefVar {
            player,
            low,
            high: low + 1 + rest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Forbids one cyclic orientation of an outcome triple for a player.
    Acyclicity { player: Player, triple: [OutcomeId; 3] },
    /// Some player can profitably deviate from this situation.
    NeFree { situation: usize },
    /// Excludes a previously found model.
    Blocking,
    /// Clause from external input.
    Input,
}

/// A CNF formula with per-clause provenance and, for preference
/// encodings, the variable map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    var_count: usize,
    clauses: Vec<Vec<Lit>>,
    provenance: Vec<Provenance>,
    vars: Option<VarMap>,
}

impl Cnf {
    pub fn new(var_count: usize) -> Self {
        Cnf {
            var_count,
            clauses: Vec::new(),
            provenance: Vec::new(),
            vars: None,
        }
    }

    fn with_vars(vars: VarMap) -> Self {
        let mut cnf = Cnf::new(vars.count());
        cnf.vars = Some(vars);
        cnf
    }

    /// A plain formula over `var_count` variables.
    pub fn from_clauses(var_count: usize, clauses: Vec<Vec<Lit>>) -> Self {
        let mut cnf = Cnf::new(var_count);
        for c in clauses {
            cnf.push(c, Provenance::Input);
        }
        cnf
    }

    /// Adds a clause, dropping duplicate literals. Tautologies are skipped.
    /// Returns whether the clause was kept.
    pub fn push(&mut self, lits: Vec<Lit>, provenance: Provenance) -> bool {
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for l in lits {
            assert!(
                l != 0 && l.unsigned_abs() as usize <= self.var_count,
                "literal {l} out of range"
            );
            if clause.contains(&-l) {
                return false;
            }
            if !clause.contains(&l) {
                clause.push(l);
            }
        }
        self.clauses.push(clause);
        self.provenance.push(provenance);
        true
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn vars(&self) -> Option<&VarMap> {
        self.vars.as_ref()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Appends all clauses of `other`, which must share the variable space.
    pub fn extend(&mut self, other: Cnf) {
        assert_eq!(self.var_count, other.var_count);
        self.clauses.extend(other.clauses);
        self.provenance.extend(other.provenance);
    }

    /// Drops clauses equal (as literal sets) to an earlier clause.
    pub fn dedup(&self) -> Cnf {
        let mut seen = std::collections::HashSet::new();
        let mut out = Cnf {
            var_count: self.var_count,
            clauses: Vec::new(),
            provenance: Vec::new(),
            vars: self.vars.clone(),
        };
        for (c, p) in self.clauses.iter().zip(&self.provenance) {
            let mut key = c.clone();
            key.sort_unstable();
            if seen.insert(key) {
                out.clauses.push(c.clone());
                out.provenance.push(p.clone());
            }
        }
        out
    }

    /// Number of clauses with the given provenance kind.
    pub fn count_acyclicity(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p, Provenance::Acyclicity { .. }))
            .count()
    }

    pub fn count_ne_free(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p, Provenance::NeFree { .. }))
            .count()
    }
}

/// A full truth assignment; entry `v - 1` is the value of variable `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn value(&self, lit: Lit) -> bool {
        let v = self.0[lit.unsigned_abs() as usize - 1];
        if lit > 0 {
            v
        } else {
            !v
        }
    }

    pub fn satisfies(&self, cnf: &Cnf) -> bool {
        self.0.len() == cnf.var_count()
            && cnf.clauses().iter().all(|c| c.iter().any(|&l| self.value(l)))
    }

    /// Model line in SAT-competition style: `v 1 -2 3 0`.
    pub fn to_model_line(&self) -> String {
        let mut parts = vec!["v".to_string()];
        for (i, &b) in self.0.iter().enumerate() {
            let v = i as i64 + 1;
            parts.push(if b { v } else { -v }.to_string());
        }
        parts.push("0".into());
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    CapExceeded(#[from] CapExceeded),
    /// No player can change the outcome of this situation, so it is an
    /// equilibrium under every preference profile.
    #[error("situation {situation} has no outcome-changing deviation; it is an equilibrium for every preference profile")]
    EmptyClause { situation: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("formula carries no preference variable map")]
    NoVarMap,
    #[error("assignment has {got} values, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("assignment orients player {player}'s preferences cyclically")]
    CyclicTournament { player: usize },
}

fn var_map(os: &OutcomeSet, players: usize) -> VarMap {
    VarMap::new(players, os.labels().into_iter().map(String::from).collect())
}

/// Clauses forbidding every directed 3-cycle in every player's tournament.
pub fn build_acyclicity_cnf(os: &OutcomeSet, players: usize) -> Cnf {
    acyclicity(var_map(os, players))
}

fn acyclicity(vars: VarMap) -> Cnf {
    let k = vars.outcomes();
    let mut cnf = Cnf::with_vars(vars);
    let vars = cnf.vars.clone().expect("just set");
    for i in 0..vars.players() {
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    // not (a > b > c > a)
                    cnf.push(
                        vec![-vars.prefers(i, a, b), -vars.prefers(i, b, c), -vars.prefers(i, c, a)],
                        Provenance::Acyclicity { player: i, triple: [a, b, c] },
                    );
                    // not (a > c > b > a)
                    cnf.push(
                        vec![-vars.prefers(i, a, c), -vars.prefers(i, c, b), -vars.prefers(i, b, a)],
                        Provenance::Acyclicity { player: i, triple: [a, c, b] },
                    );
                }
            }
        }
    }
    cnf
}

/// One clause per situation: some player prefers the outcome of one of
/// their outcome-changing deviations.
pub fn build_ne_free_cnf(gs: &GameStructure, os: &OutcomeSet, cap: usize) -> Result<Cnf, EncodeError> {
    let nf = normal_form(gs, os, cap)?;
    let mut cnf = Cnf::with_vars(var_map(os, gs.players()));
    let vars = cnf.vars.clone().expect("just set");
    for situation in 0..nf.len() {
        let coords = nf.coords(situation);
        let current = nf.outcome(situation);
        let mut lits = Vec::new();
        for (i, &at) in coords.iter().enumerate() {
            let stride = nf.stride(i);
            let base = situation - at * stride;
            for k in 0..nf.shape()[i] {
                let o = nf.outcome(base + k * stride);
                if o != current {
                    lits.push(vars.prefers(i, o, current));
                }
            }
        }
        if lits.is_empty() {
            return Err(EncodeError::EmptyClause { situation });
        }
        cnf.push(lits, Provenance::NeFree { situation });
    }
    Ok(cnf)
}

/// Acyclicity clauses followed by the NE-free clauses.
pub fn encode(gs: &GameStructure, os: &OutcomeSet, cap: usize) -> Result<Cnf, EncodeError> {
    let mut cnf = build_acyclicity_cnf(os, gs.players());
    cnf.extend(build_ne_free_cnf(gs, os, cap)?);
    Ok(cnf)
}

/// Reads the strict orders off a model of the acyclicity clauses.
pub fn decode_model(cnf: &Cnf, assignment: &Assignment) -> Result<PreferenceProfile, DecodeError> {
    let vars = cnf.vars().ok_or(DecodeError::NoVarMap)?;
    if assignment.0.len() != cnf.var_count() {
        return Err(DecodeError::WrongLength {
            expected: cnf.var_count(),
            got: assignment.0.len(),
        });
    }
    let k = vars.outcomes();
    let prefs = (0..vars.players())
        .map(|i| {
            // A tournament is transitive iff its score sequence is 0..k.
            let wins: Vec<usize> = (0..k)
                .map(|a| {
                    (0..k)
                        .filter(|&b| b != a && assignment.value(vars.prefers(i, a, b)))
                        .count()
                })
                .collect();
            let mut order: Vec<OutcomeId> = (0..k).collect();
            order.sort_by(|&a, &b| wins[b].cmp(&wins[a]));
            if order.iter().enumerate().any(|(r, &o)| wins[o] != k - 1 - r) {
                return Err(DecodeError::CyclicTournament { player: i + 1 });
            }
            Ok(Preference::from_order(order).expect("sorted ids are a permutation"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PreferenceProfile::new(prefs).expect("all orders have k outcomes"))
}

/// The assignment encoding `pp` under `cnf`'s variable map.
pub fn profile_to_assignment(vars: &VarMap, pp: &PreferenceProfile) -> Assignment {
    let mut values = vec![false; vars.count()];
    for i in 0..vars.players() {
        for a in 0..vars.outcomes() {
            for b in a + 1..vars.outcomes() {
                values[vars.var(i, a, b) - 1] = pp.get(i).better(a, b);
            }
        }
    }
    Assignment(values)
}
