//! DPLL with unit propagation over two watched literals.
//!
//! Branching is deterministic: the lowest-index unassigned variable, true
//! first. No clause learning; backtracking is chronological.

use super::{Assignment, Cnf, Lit, Provenance};
use crate::CapExceeded;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
}

impl SolveResult {
    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat => None,
        }
    }
}

fn code(lit: Lit) -> usize {
    let v = lit.unsigned_abs() as usize - 1;
    2 * v + usize::from(lit < 0)
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    /// Clause ids watching each literal code.
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    trail: Vec<Lit>,
    /// `(trail length before the decision, decision literal, flipped)`.
    decisions: Vec<(usize, Lit, bool)>,
    head: usize,
    units: Vec<Lit>,
    trivially_unsat: bool,
}

impl Solver {
    fn new(cnf: &Cnf) -> Self {
        let n = cnf.var_count();
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![None; n],
            trail: Vec::new(),
            decisions: Vec::new(),
            head: 0,
            units: Vec::new(),
            trivially_unsat: false,
        };
        for c in cnf.clauses() {
            match c.len() {
                0 => s.trivially_unsat = true,
                1 => s.units.push(c[0]),
                _ => {
                    let id = s.clauses.len();
                    s.watches[code(c[0])].push(id);
                    s.watches[code(c[1])].push(id);
                    s.clauses.push(c.clone());
                }
            }
        }
        s
    }

    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value[lit.unsigned_abs() as usize - 1].map(|v| v == (lit > 0))
    }

    fn assign(&mut self, lit: Lit) {
        self.value[lit.unsigned_abs() as usize - 1] = Some(lit > 0);
        self.trail.push(lit);
    }

    /// Sets `lit` true unless it is already; `false` on a direct conflict.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match self.lit_value(lit) {
            Some(v) => v,
            None => {
                self.assign(lit);
                true
            }
        }
    }

    /// Propagates the trail from `head`; `false` on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let false_lit = -self.trail[self.head];
            self.head += 1;
            let watchers = std::mem::take(&mut self.watches[code(false_lit)]);
            let mut keep = Vec::with_capacity(watchers.len());
            let mut conflict = false;
            let mut rest = watchers.into_iter();
            for id in rest.by_ref() {
                let clause = &mut self.clauses[id];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_value = self.value[other.unsigned_abs() as usize - 1].map(|v| v == (other > 0));
                if other_value == Some(true) {
                    keep.push(id);
                    continue;
                }
                let replacement = (2..clause.len()).find(|&j| {
                    let l = clause[j];
                    self.value[l.unsigned_abs() as usize - 1].map(|v| v == (l > 0)) != Some(false)
                });
                if let Some(j) = replacement {
                    clause.swap(1, j);
                    let new_watch = clause[1];
                    self.watches[code(new_watch)].push(id);
                    continue;
                }
                keep.push(id);
                if other_value == Some(false) {
                    conflict = true;
                    break;
                }
                self.assign(other);
            }
            keep.extend(rest);
            self.watches[code(false_lit)] = keep;
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let lit = self.trail.pop().expect("non-empty trail");
            self.value[lit.unsigned_abs() as usize - 1] = None;
        }
        self.head = self.head.min(len);
    }

    /// Undoes the most recent unflipped decision and asserts its negation.
    fn backtrack(&mut self) -> bool {
        while let Some((len, lit, flipped)) = self.decisions.pop() {
            self.undo_to(len);
            if !flipped {
                self.decisions.push((len, -lit, true));
                self.assign(-lit);
                return true;
            }
        }
        false
    }

    fn run(mut self) -> SolveResult {
        if self.trivially_unsat {
            return SolveResult::Unsat;
        }
        let units = std::mem::take(&mut self.units);
        for u in units {
            if !self.enqueue(u) {
                return SolveResult::Unsat;
            }
        }
        let mut next_var = 0usize;
        loop {
            if !self.propagate() {
                if !self.backtrack() {
                    return SolveResult::Unsat;
                }
                next_var = 0;
                continue;
            }
            while next_var < self.value.len() && self.value[next_var].is_some() {
                next_var += 1;
            }
            if next_var == self.value.len() {
                let values = self.value.iter().map(|v| v.expect("all assigned")).collect();
                return SolveResult::Sat(Assignment(values));
            }
            let lit = next_var as Lit + 1;
            self.decisions.push((self.trail.len(), lit, false));
            self.assign(lit);
        }
    }
}

/// Complete DPLL search.
pub fn solve(cnf: &Cnf) -> SolveResult {
    Solver::new(cnf).run()
}

/// All models of a formula, each excluded by a blocking clause once found.
pub struct Models {
    cnf: Cnf,
    done: bool,
}

impl Models {
    pub fn new(cnf: &Cnf) -> Self {
        Models {
            cnf: cnf.clone(),
            done: false,
        }
    }
}

impl Iterator for Models {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        match solve(&self.cnf) {
            SolveResult::Unsat => {
                self.done = true;
                None
            }
            SolveResult::Sat(model) => {
                let blocking: Vec<Lit> = model
                    .0
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| if b { -(i as Lit + 1) } else { i as Lit + 1 })
                    .collect();
                if blocking.is_empty() {
                    // The only assignment of a variable-free formula.
                    self.done = true;
                } else {
                    self.cnf.push(blocking, Provenance::Blocking);
                }
                Some(model)
            }
        }
    }
}

/// Every model, failing once more than `cap` are found.
pub fn enumerate_models(cnf: &Cnf, cap: usize) -> Result<Vec<Assignment>, CapExceeded> {
    let mut out = Vec::new();
    for m in Models::new(cnf) {
        if out.len() == cap {
            return Err(CapExceeded::new("models", None, cap));
        }
        out.push(m);
    }
    Ok(out)
}
