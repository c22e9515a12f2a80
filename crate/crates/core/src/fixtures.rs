//! The bundled example games with their published results, and the
//! end-to-end check that reproduces them.
//!
//! The data lives in the repository's `fixtures/` directory:
//! `paper.game` (the three-person NE-free game), `paper.table` (its normal
//! form with improving players, cell by cell) and `blackmail.game`.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::equilibrium::{all_ne, annotate, delete_bad_terminal_moves, ne_cells};
use crate::game::{normal_form, GameStructure, OutcomeId, OutcomeKind, OutcomeSet, Player, StrategySpace, DEFAULT_CELL_CAP};
use crate::gamefile::{parse_game_file, GameFile, GameFileError};
use crate::graph::SccClass;
use crate::preference::{cnd_c0, cnd_c22, enumerate_preference_profiles, merge_cyclic, rank_vector, PreferenceProfile};
use crate::sat::{decode_model, encode, profile_to_assignment, solve};

pub const PAPER_GAME: &str = include_str!("../../../fixtures/paper.game");
pub const PAPER_TABLE: &str = include_str!("../../../fixtures/paper.table");
pub const BLACKMAIL_GAME: &str = include_str!("../../../fixtures/blackmail.game");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error(transparent)]
    GameFile(#[from] GameFileError),
    #[error("game file has no preferences")]
    MissingPreferences,
    #[error("table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// One normal-form cell as printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedCell {
    /// Normal-form index of the situation.
    pub index: usize,
    /// Table line the cell was read from.
    pub line: usize,
    /// Outcome label as printed, before relabeling.
    pub printed: String,
    /// Outcome after applying the table's relabeling.
    pub outcome: OutcomeId,
    /// Improving players, 0-based, ascending.
    pub improvers: Vec<Player>,
}

/// A transcribed normal form, indexed like [`crate::game::NormalForm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedTable {
    /// `(printed, actual)` label pairs from `relabel:` lines.
    pub relabel: Vec<(String, String)>,
    pub cells: Vec<ExpectedCell>,
}

fn compact(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Reads a table of lines `<x1> | <x2> | ... -> <outcome>^{<players>}`,
/// one per situation, strategies written as [`crate::game::Strategy`]
/// displays them. `relabel: p=q ...` maps printed outcome labels.
pub fn parse_table(text: &str, gs: &GameStructure, os: &OutcomeSet) -> Result<ExpectedTable, FixtureError> {
    let space = StrategySpace::new(gs);
    let names: Vec<Vec<String>> = (0..gs.players())
        .map(|i| {
            (0..space.count(i))
                .map(|k| compact(&space.strategy(gs, i, k).display(gs.graph()).to_string()))
                .collect()
        })
        .collect();
    let total = space.total().ok_or_else(|| FixtureError::Table {
        line: 0,
        message: "normal form too large".into(),
    })?;
    let mut relabel: Vec<(String, String)> = Vec::new();
    let mut cells: Vec<Option<ExpectedCell>> = vec![None; total];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| FixtureError::Table { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("relabel:") {
            for pair in rest.split_whitespace() {
                let (from, to) = pair
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `printed=actual`, got `{pair}`")))?;
                relabel.push((from.to_string(), to.to_string()));
            }
            continue;
        }
        let (strategies, cell) = content
            .rsplit_once("->")
            .ok_or_else(|| err("expected `->` before the cell".into()))?;
        let parts: Vec<&str> = strategies.split('|').collect();
        if parts.len() != gs.players() {
            return Err(err(format!("expected {} strategies, found {}", gs.players(), parts.len())));
        }
        let coords = parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let key = compact(p);
                names[i]
                    .iter()
                    .position(|n| *n == key)
                    .ok_or_else(|| err(format!("`{}` is not a strategy of player {}", p.trim(), i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (printed, players) = cell
            .trim()
            .split_once("^{")
            .and_then(|(o, rest)| rest.strip_suffix('}').map(|p| (o.trim(), p)))
            .ok_or_else(|| err(format!("expected `outcome^{{players}}`, got `{}`", cell.trim())))?;
        let improvers = players
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<usize>() {
                Ok(p) if (1..=gs.players()).contains(&p) => Ok(p - 1),
                _ => Err(err(format!("`{s}` is not a player"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let actual = relabel
            .iter()
            .find(|(from, _)| from == printed)
            .map_or(printed, |(_, to)| to.as_str());
        let outcome = os
            .find(actual)
            .ok_or_else(|| err(format!("unknown outcome `{actual}`")))?;
        let index = coords.iter().enumerate().fold(0, |acc, (i, &c)| acc * space.count(i) + c);
        if cells[index].is_some() {
            return Err(err("situation listed twice".into()));
        }
        cells[index] = Some(ExpectedCell {
            index,
            line,
            printed: printed.to_string(),
            outcome,
            improvers,
        });
    }
    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| FixtureError::Table {
                line: text.lines().count() + 1,
                message: format!("situation {i} missing"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExpectedTable { relabel, cells })
}

/// The three-person game whose normal form has no equilibrium although its
/// rank vector is `(1, 2, 1)`.
#[derive(Debug, Clone)]
pub struct PaperCounterexample {
    pub game: GameStructure,
    pub outcomes: OutcomeSet,
    pub preferences: PreferenceProfile,
    pub expected_table: ExpectedTable,
}

fn with_preferences(text: &str) -> Result<(GameFile, PreferenceProfile), FixtureError> {
    let gf = parse_game_file(text)?;
    let pp = gf.preferences.clone().ok_or(FixtureError::MissingPreferences)?;
    Ok((gf, pp))
}

impl PaperCounterexample {
    pub fn from_texts(game: &str, table: &str) -> Result<Self, FixtureError> {
        let (gf, preferences) = with_preferences(game)?;
        let expected_table = parse_table(table, &gf.game, &gf.outcomes)?;
        Ok(PaperCounterexample {
            game: gf.game,
            outcomes: gf.outcomes,
            preferences,
            expected_table,
        })
    }

    pub fn load() -> Self {
        Self::from_texts(PAPER_GAME, PAPER_TABLE).expect("bundled fixture is valid")
    }
}

/// Two-person play-once game where player 2 can threaten a move bad for
/// both; two equilibria, one of which relies on the threat.
#[derive(Debug, Clone)]
pub struct BlackmailExample {
    pub game: GameStructure,
    pub outcomes: OutcomeSet,
    pub preferences: PreferenceProfile,
}

impl BlackmailExample {
    pub fn from_text(game: &str) -> Result<Self, FixtureError> {
        let (gf, preferences) = with_preferences(game)?;
        Ok(BlackmailExample {
            game: gf.game,
            outcomes: gf.outcomes,
            preferences,
        })
    }

    pub fn load() -> Self {
        Self::from_text(BLACKMAIL_GAME).expect("bundled fixture is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub id: char,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, id: char) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "({}) {status} {}: {}", c.id, c.name, c.detail)?;
        }
        Ok(())
    }
}

type CheckFn = fn(&PaperCounterexample, &BlackmailExample) -> (bool, String);

const CHECKS: [(char, &str, CheckFn); 9] = [
    ('a', "strongly connected components", check_scc),
    ('b', "outcome set", check_outcomes),
    ('c', "rank vector", check_rank),
    ('d', "conditions C22 and C0", check_conditions),
    ('e', "normal form table", check_table),
    ('f', "no Nash equilibrium", check_ne_free),
    ('g', "merged game always has an equilibrium", check_merged),
    ('h', "SAT encoding", check_sat),
    ('i', "blackmail equilibria", check_blackmail),
];

/// Runs every check on the bundled fixtures.
pub fn verify_paper() -> Report {
    verify(&PaperCounterexample::load(), &BlackmailExample::load())
}

/// Runs every check on the given instances, in parallel.
pub fn verify(paper: &PaperCounterexample, blackmail: &BlackmailExample) -> Report {
    let checks = CHECKS
        .par_iter()
        .map(|&(id, name, f)| {
            let (passed, detail) = f(paper, blackmail);
            Check {
                id,
                name,
                passed,
                detail,
            }
        })
        .collect();
    Report { checks }
}

fn names(gs: &GameStructure, vs: &[usize]) -> String {
    let ns: Vec<&str> = vs.iter().map(|&v| gs.graph().name(v)).collect();
    format!("{{{}}}", ns.join(", "))
}

fn check_scc(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let expected: [(&[&str], SccClass); 6] = [
        (&["s1"], SccClass::Transient),
        (&["u1", "u2"], SccClass::Inner),
        (&["v1", "u3"], SccClass::Inner),
        (&["v2", "v3"], SccClass::Inner),
        (&["a1"], SccClass::Terminal),
        (&["a2"], SccClass::Terminal),
    ];
    let gs = &p.game;
    let scc = gs.scc();
    let found: Vec<(String, SccClass)> = (0..scc.len())
        .map(|j| (names(gs, scc.component(j)), scc.class(j)))
        .collect();
    let render = |list: &[(String, SccClass)]| {
        list.iter()
            .map(|(n, c)| format!("{n} {c}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut missing = Vec::new();
    for (vs, class) in expected {
        let mut ids: Vec<usize> = match vs.iter().map(|n| gs.graph().vertex(n)).collect::<Option<Vec<_>>>() {
            Some(ids) => ids,
            None => return (false, format!("vertices {vs:?} not all present")),
        };
        ids.sort_unstable();
        let key = (names(gs, &ids), class);
        if !found.contains(&key) {
            missing.push(key);
        }
    }
    if missing.is_empty() && found.len() == 6 {
        (true, render(&found))
    } else {
        (
            false,
            format!("expected 6 components; found {}; missing {}", render(&found), render(&missing)),
        )
    }
}

fn check_outcomes(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let os = &p.outcomes;
    let mut labels: Vec<(&str, OutcomeKind)> = (0..os.len()).map(|o| (os.label(o), os.kind(o))).collect();
    let detail = labels.iter().map(|(l, _)| *l).collect::<Vec<_>>().join(", ");
    labels.sort_by_key(|&(l, _)| l);
    let expected = [
        ("a1", OutcomeKind::Terminal),
        ("a2", OutcomeKind::Terminal),
        ("c1", OutcomeKind::Cyclic),
        ("c2", OutcomeKind::Cyclic),
        ("c3", OutcomeKind::Cyclic),
    ];
    (labels == expected, format!("{{{detail}}}"))
}

fn check_rank(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let r = rank_vector(&p.outcomes, &p.preferences);
    (r.0 == [1, 2, 1], format!("r = {r}"))
}

fn check_conditions(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let c22 = cnd_c22(&p.outcomes, &p.preferences);
    let c0 = cnd_c0(&p.outcomes, &p.preferences);
    (!c22 && !c0, format!("C22 = {c22}, C0 = {c0}"))
}

fn check_table(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let gs = &p.game;
    let os = &p.outcomes;
    let nf = match normal_form(gs, os, DEFAULT_CELL_CAP) {
        Ok(nf) => nf,
        Err(e) => return (false, e.to_string()),
    };
    let cells = &p.expected_table.cells;
    if nf.len() != cells.len() {
        return (false, format!("normal form has {} cells, table has {}", nf.len(), cells.len()));
    }
    let space = StrategySpace::new(gs);
    let annotations = annotate(&nf, &p.preferences);
    for exp in cells {
        let got = &annotations[exp.index];
        if got.outcome != exp.outcome || got.improvers() != exp.improvers {
            let profile = space.profile(gs, &got.coords);
            let show = |o: OutcomeId, ps: &[Player]| {
                let ps: Vec<String> = ps.iter().map(|p| (p + 1).to_string()).collect();
                format!("{}^{{{}}}", os.label(o), ps.join(","))
            };
            return (
                false,
                format!(
                    "first divergence at table line {}, situation {}: expected {} (printed {}), computed {}",
                    exp.line,
                    profile.display(gs.graph()),
                    show(exp.outcome, &exp.improvers),
                    exp.printed,
                    show(got.outcome, &got.improvers())
                ),
            );
        }
    }
    let relabeled = cells.iter().filter(|c| os.label(c.outcome) != c.printed).count();
    (
        true,
        format!("{} cells match ({relabeled} read through the table's relabeling)", cells.len()),
    )
}

fn check_ne_free(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    match all_ne(&p.game, &p.outcomes, &p.preferences, DEFAULT_CELL_CAP) {
        Ok(ne) if ne.is_empty() => (true, "NE-free".into()),
        Ok(ne) => (
            false,
            format!("{} equilibria, first {}", ne.len(), ne[0].display(p.game.graph())),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn check_merged(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let run = || -> Result<(bool, String), String> {
        let merged = merge_cyclic(&p.outcomes).map_err(|e| e.to_string())?;
        let map = p.outcomes.map_into(&merged);
        let nf = normal_form(&p.game, &p.outcomes, DEFAULT_CELL_CAP)
            .map_err(|e| e.to_string())?
            .map_outcomes(&map);
        let profiles = enumerate_preference_profiles(merged.len(), p.game.players(), usize::MAX)
            .map_err(|e| e.to_string())?;
        let failure = (0..profiles.len())
            .into_par_iter()
            .find_first(|&i| ne_cells(&nf, &profiles.profile(i)).is_empty());
        let labels = merged.labels().join(", ");
        Ok(match failure {
            None => (
                true,
                format!("{} profiles over {{{labels}}}, each with an equilibrium", profiles.len()),
            ),
            Some(i) => (
                false,
                format!(
                    "profile {i} over {{{labels}}} has no equilibrium: {}",
                    profiles.profile(i).display(&merged).replace('\n', "; ")
                ),
            ),
        })
    };
    run().unwrap_or_else(|e| (false, e))
}

fn check_sat(p: &PaperCounterexample, _: &BlackmailExample) -> (bool, String) {
    let cnf = match encode(&p.game, &p.outcomes, DEFAULT_CELL_CAP) {
        Ok(cnf) => cnf,
        Err(e) => return (false, e.to_string()),
    };
    let size = format!("{} variables, {} clauses", cnf.var_count(), cnf.len());
    let vars = cnf.vars().expect("encoding carries its variables");
    if !profile_to_assignment(vars, &p.preferences).satisfies(&cnf) {
        return (false, format!("{size}; the fixture's preferences violate the encoding"));
    }
    let Some(model) = solve(&cnf).model().cloned() else {
        return (false, format!("{size}; unsatisfiable"));
    };
    let pp = match decode_model(&cnf, &model) {
        Ok(pp) => pp,
        Err(e) => return (false, format!("{size}; {e}")),
    };
    match all_ne(&p.game, &p.outcomes, &pp, DEFAULT_CELL_CAP) {
        Ok(ne) if ne.is_empty() => (
            true,
            format!("{size}; first model is NE-free: {}", pp.display(&p.outcomes).replace('\n', "; ")),
        ),
        Ok(ne) => (
            false,
            format!(
                "{size}; decoded profile has equilibrium {}",
                ne[0].display(p.game.graph())
            ),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn check_blackmail(_: &PaperCounterexample, b: &BlackmailExample) -> (bool, String) {
    let count = |gs: &GameStructure| all_ne(gs, &b.outcomes, &b.preferences, DEFAULT_CELL_CAP).map(|ne| {
        let shown: Vec<String> = ne.iter().map(|x| x.display(gs.graph())).collect();
        (ne.len(), shown.join(", "))
    });
    let pruned = delete_bad_terminal_moves(&b.game, &b.outcomes, &b.preferences);
    match (count(&b.game), count(&pruned)) {
        (Ok((before, shown_before)), Ok((after, shown_after))) => (
            before == 2 && after == 1,
            format!("{before} before pruning [{shown_before}], {after} after [{shown_after}]"),
        ),
        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
    }
}

/// Cells whose printed outcome label differs from the computed one when
/// read without the table's relabeling.
pub fn literal_outcome_mismatches(p: &PaperCounterexample) -> Result<Vec<usize>, crate::CapExceeded> {
    let nf = normal_form(&p.game, &p.outcomes, DEFAULT_CELL_CAP)?;
    Ok(p.expected_table
        .cells
        .iter()
        .filter(|c| p.outcomes.label(nf.outcome(c.index)) != c.printed)
        .map(|c| c.index)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_load() {
        let p = PaperCounterexample::load();
        assert_eq!(p.expected_table.cells.len(), 192);
        assert_eq!(p.game.graph().edge_count(), 15);
        let b = BlackmailExample::load();
        assert_eq!(b.outcomes.labels(), ["t", "t'", "t''"]);
    }

    #[test]
    fn table_spot_cells() {
        let p = PaperCounterexample::load();
        let os = &p.outcomes;
        let cell = |sub: usize, row: usize, col: usize| {
            let c = &p.expected_table.cells[row * 16 + col * 4 + sub];
            (os.label(c.outcome).to_string(), c.improvers.clone())
        };
        assert_eq!(cell(0, 0, 0), ("c1".into(), vec![0, 1]));
        assert_eq!(cell(3, 0, 0), ("c1".into(), vec![0]));
        assert_eq!(cell(2, 0, 2), ("c3".into(), vec![2]));
        assert!(p.expected_table.cells.iter().all(|c| !c.improvers.is_empty()));
    }

    #[test]
    fn table_errors() {
        let p = PaperCounterexample::load();
        let err = parse_table("(s1->u2) | x | y -> c1^{1}\n", &p.game, &p.outcomes).unwrap_err();
        assert!(matches!(err, FixtureError::Table { line: 1, .. }));
        let err = parse_table("", &p.game, &p.outcomes).unwrap_err();
        assert!(err.to_string().contains("situation 0 missing"));
    }
}
