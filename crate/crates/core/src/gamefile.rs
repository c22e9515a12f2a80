//! The line-oriented game file format.
//!
//! ```text
//! # comment
//! players: 2
//! positions: s:1 v:2
//! terminals: t t'
//! initial: s
//! edges:
//!   s -> v
//!   s -> t
//!   v -> t'
//! cycles:
//!   c1 = {u, w}
//! preferences:
//!   1: t' > t
//!   2: t > t'
//! ```
//!
//! Sections appear in this order; `cycles` and `preferences` are optional.
//! Entries of `edges`, `cycles` and `preferences` may share the header line
//! or follow on their own lines. Vertices are numbered positions first,
//! then terminals, in the order listed. A `cycles` entry names the vertex
//! set of a terminal or inner SCC; giving one label to several components
//! merges them into one outcome.

use std::fmt::Write as _;

use thiserror::Error;

use crate::game::{build_outcomes, GameBuilder, GameStructure, OutcomeError, OutcomeSet, ValidationError};
use crate::preference::{Preference, PreferenceError, PreferenceProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameFile {
    pub game: GameStructure,
    pub outcomes: OutcomeSet,
    pub preferences: Option<PreferenceProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameFileError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}, column {col}: unknown vertex `{name}`")]
    UnknownVertex { line: usize, col: usize, name: String },
    #[error("line {line}: `{label}` does not name the vertex set of a terminal or inner strongly connected component")]
    CycleLabelMismatch { line: usize, label: String },
    #[error("line {line}: {source}")]
    Cycles { line: usize, source: OutcomeError },
    #[error("line {line}: {source}")]
    Preference { line: usize, source: PreferenceError },
    #[error("invalid game: {}", crate::game::format_errors(.0))]
    ValidationFailed(Vec<ValidationError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Players,
    Positions,
    Terminals,
    Initial,
    Edges,
    Cycles,
    Preferences,
}

impl Section {
    const ALL: [(Section, &'static str); 7] = [
        (Section::Players, "players"),
        (Section::Positions, "positions"),
        (Section::Terminals, "terminals"),
        (Section::Initial, "initial"),
        (Section::Edges, "edges"),
        (Section::Cycles, "cycles"),
        (Section::Preferences, "preferences"),
    ];

    fn from_keyword(s: &str) -> Option<Section> {
        Section::ALL.iter().find(|(_, k)| *k == s).map(|(sec, _)| *sec)
    }

    fn keyword(self) -> &'static str {
        Section::ALL.iter().find(|(s, _)| *s == self).map(|(_, k)| *k).expect("listed")
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn is_punct(c: char) -> bool {
    matches!(c, ':' | '=' | '{' | '}' | ',' | '>')
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1).map(|p| p.1) == Some('>') {
            tokens.push(Token { text: &line[pos..pos + 2], col });
            i += 2;
        } else if is_punct(c) {
            tokens.push(Token { text: &line[pos..pos + c.len_utf8()], col });
            i += 1;
        } else {
            let mut j = i;
            while j < chars.len() {
                let c = chars[j].1;
                if c.is_whitespace() || is_punct(c) || (c == '-' && chars.get(j + 1).map(|p| p.1) == Some('>')) {
                    break;
                }
                j += 1;
            }
            let end = chars.get(j).map_or(line.len(), |p| p.0);
            tokens.push(Token { text: &line[pos..end], col });
            i = j;
        }
    }
    tokens
}

fn is_name(t: &str) -> bool {
    !t.is_empty() && t != "->" && !t.chars().any(is_punct)
}

struct Cursor<'a> {
    line: usize,
    end_col: usize,
    tokens: std::iter::Peekable<std::vec::IntoIter<Token<'a>>>,
}

impl<'a> Cursor<'a> {
    fn err(&self, col: usize, message: impl Into<String>) -> GameFileError {
        GameFileError::Syntax {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn next_col(&mut self) -> usize {
        self.tokens.peek().map_or(self.end_col, |t| t.col)
    }

    fn name(&mut self, what: &str) -> Result<Token<'a>, GameFileError> {
        let col = self.next_col();
        match self.tokens.next() {
            Some(t) if is_name(t.text) => Ok(t),
            _ => Err(self.err(col, format!("expected {what}"))),
        }
    }

    fn punct(&mut self, p: &str) -> Result<(), GameFileError> {
        let col = self.next_col();
        match self.tokens.next() {
            Some(t) if t.text == p => Ok(()),
            _ => Err(self.err(col, format!("expected `{p}`"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, GameFileError> {
        let col = self.next_col();
        match self.tokens.next().and_then(|t| t.text.parse::<usize>().ok()) {
            Some(n) => Ok(n),
            None => Err(self.err(col, format!("expected {what}"))),
        }
    }

    fn at_end(&mut self) -> bool {
        self.tokens.peek().is_none()
    }

    fn finish(&mut self) -> Result<(), GameFileError> {
        match self.tokens.peek() {
            None => Ok(()),
            Some(&t) => Err(self.err(t.col, format!("unexpected `{}`", t.text))),
        }
    }
}

struct Named {
    line: usize,
    col: usize,
    name: String,
}

#[derive(Default)]
struct Raw {
    players: Option<usize>,
    positions: Vec<(Named, usize)>,
    terminals: Vec<Named>,
    initial: Option<Named>,
    edges: Vec<(Named, Named)>,
    cycles: Vec<(usize, String, Vec<Named>)>,
    preferences: Vec<(usize, usize, Vec<String>)>,
    seen: Vec<Section>,
}

fn named(cur: &mut Cursor<'_>, what: &str) -> Result<Named, GameFileError> {
    let t = cur.name(what)?;
    Ok(Named {
        line: cur.line,
        col: t.col,
        name: t.text.to_string(),
    })
}

fn parse_entry(raw: &mut Raw, section: Section, cur: &mut Cursor<'_>) -> Result<(), GameFileError> {
    match section {
        Section::Players => {
            if raw.players.is_some() {
                let col = cur.next_col();
                return Err(cur.err(col, "player count given twice"));
            }
            let col = cur.next_col();
            let n = cur.number("player count")?;
            if n == 0 {
                return Err(cur.err(col, "a game needs at least one player"));
            }
            raw.players = Some(n);
        }
        Section::Positions => {
            while !cur.at_end() {
                let v = named(cur, "position name")?;
                cur.punct(":")?;
                let col = cur.next_col();
                let p = cur.number("owning player")?;
                if p == 0 {
                    return Err(cur.err(col, "players are numbered from 1"));
                }
                raw.positions.push((v, p));
            }
        }
        Section::Terminals => {
            while !cur.at_end() {
                raw.terminals.push(named(cur, "terminal name")?);
            }
        }
        Section::Initial => {
            if raw.initial.is_some() {
                let col = cur.next_col();
                return Err(cur.err(col, "initial position given twice"));
            }
            raw.initial = Some(named(cur, "initial position")?);
        }
        Section::Edges => {
            let t = named(cur, "edge tail")?;
            cur.punct("->")?;
            let h = named(cur, "edge head")?;
            raw.edges.push((t, h));
        }
        Section::Cycles => {
            let label = cur.name("cycle label")?.text.to_string();
            cur.punct("=")?;
            cur.punct("{")?;
            let mut members = vec![named(cur, "vertex")?];
            loop {
                let col = cur.next_col();
                match cur.tokens.next().map(|t| t.text) {
                    Some(",") => members.push(named(cur, "vertex")?),
                    Some("}") => break,
                    _ => return Err(cur.err(col, "expected `,` or `}`")),
                }
            }
            raw.cycles.push((cur.line, label, members));
        }
        Section::Preferences => {
            let col = cur.next_col();
            let player = cur.number("player number")?;
            if player == 0 {
                return Err(cur.err(col, "players are numbered from 1"));
            }
            cur.punct(":")?;
            let mut order = vec![cur.name("outcome")?.text.to_string()];
            while !cur.at_end() {
                cur.punct(">")?;
                order.push(cur.name("outcome")?.text.to_string());
            }
            raw.preferences.push((cur.line, player, order));
        }
    }
    cur.finish()
}

fn single_line(section: Section) -> bool {
    matches!(section, Section::Players | Section::Initial)
}

fn read_sections(text: &str) -> Result<Raw, GameFileError> {
    let mut raw = Raw::default();
    let mut current: Option<Section> = None;
    let mut last_line = 0;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = full.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let header = match (tokens.first(), tokens.get(1)) {
            (Some(k), Some(c)) if c.text == ":" => Section::from_keyword(k.text).map(|s| (s, k.col)),
            _ => None,
        };
        let end_col = content.chars().count() + 1;
        let mut cur = Cursor {
            line,
            end_col,
            tokens: tokens.into_iter().peekable(),
        };
        if let Some((section, col)) = header {
            if raw.seen.contains(&section) {
                return Err(cur.err(col, format!("section `{}` given twice", section.keyword())));
            }
            if raw.seen.last().is_some_and(|&s| s > section) {
                return Err(cur.err(col, format!("section `{}` out of order", section.keyword())));
            }
            let expected = Section::ALL
                .iter()
                .map(|(s, _)| *s)
                .find(|s| !raw.seen.contains(s))
                .expect("a section is missing");
            if section > expected && expected <= Section::Edges {
                return Err(cur.err(col, format!("expected section `{}`", expected.keyword())));
            }
            raw.seen.push(section);
            current = Some(section);
            cur.tokens.next();
            cur.tokens.next();
            if !cur.at_end() || single_line(section) {
                parse_entry(&mut raw, section, &mut cur)?;
            }
            continue;
        }
        match current {
            Some(s) if !single_line(s) => parse_entry(&mut raw, s, &mut cur)?,
            _ => {
                let col = cur.next_col();
                return Err(cur.err(col, "expected a section header"));
            }
        }
    }
    if let Some(missing) = Section::ALL
        .iter()
        .map(|(s, _)| *s)
        .filter(|&s| s <= Section::Edges)
        .find(|s| !raw.seen.contains(s))
    {
        return Err(GameFileError::Syntax {
            line: last_line + 1,
            col: 1,
            message: format!("missing section `{}`", missing.keyword()),
        });
    }
    Ok(raw)
}

pub fn parse_game_file(text: &str) -> Result<GameFile, GameFileError> {
    let raw = read_sections(text)?;
    let players = raw.players.expect("players section is mandatory");

    let mut declared: Vec<&str> = Vec::new();
    let mut builder = GameBuilder::new(players);
    for (v, p) in &raw.positions {
        declared.push(&v.name);
        builder = builder.position(&v.name, *p);
    }
    for t in &raw.terminals {
        declared.push(&t.name);
        builder = builder.terminal(&t.name);
    }
    let known = |n: &Named| -> Result<(), GameFileError> {
        if declared.contains(&n.name.as_str()) {
            Ok(())
        } else {
            Err(GameFileError::UnknownVertex {
                line: n.line,
                col: n.col,
                name: n.name.clone(),
            })
        }
    };
    let initial = raw.initial.as_ref().expect("initial section is mandatory");
    known(initial)?;
    builder = builder.initial(&initial.name);
    for (t, h) in &raw.edges {
        known(t)?;
        known(h)?;
        builder = builder.edge(&t.name, &h.name);
    }
    for (_, _, members) in &raw.cycles {
        for m in members {
            known(m)?;
        }
    }
    let game = builder.build().map_err(GameFileError::ValidationFailed)?;

    let labels: Vec<(String, Vec<usize>)> = raw
        .cycles
        .iter()
        .map(|(_, label, members)| {
            let vs = members
                .iter()
                .map(|m| game.graph().vertex(&m.name).expect("checked above"))
                .collect();
            (label.clone(), vs)
        })
        .collect();
    let outcomes = OutcomeSet::with_labels(&game, &labels).map_err(|e| {
        let label = match &e {
            OutcomeError::LabelMismatch { label } | OutcomeError::ComponentLabeledTwice { label, .. } => label,
            OutcomeError::DuplicateLabel(label) | OutcomeError::MixedMerge(label) => label,
        };
        let line = raw
            .cycles
            .iter()
            .rev()
            .find(|(_, l, _)| l == label)
            .map_or(0, |(line, _, _)| *line);
        match e {
            OutcomeError::LabelMismatch { label } => GameFileError::CycleLabelMismatch { line, label },
            source => GameFileError::Cycles { line, source },
        }
    })?;

    let preferences = if raw.seen.contains(&Section::Preferences) {
        let mut orders: Vec<Option<Preference>> = vec![None; players];
        for (line, player, order) in &raw.preferences {
            let err = |source| GameFileError::Preference { line: *line, source };
            if *player > players {
                return Err(err(PreferenceError::WrongPlayerCount {
                    expected: players,
                    got: *player,
                }));
            }
            if orders[player - 1].is_some() {
                return Err(GameFileError::Syntax {
                    line: *line,
                    col: 1,
                    message: format!("preference of player {player} given twice"),
                });
            }
            orders[player - 1] = Some(Preference::from_labels(&outcomes, order).map_err(err)?);
        }
        let prefs = orders
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| GameFileError::Syntax {
                    line: text.lines().count() + 1,
                    col: 1,
                    message: format!("missing preference of player {}", i + 1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some(PreferenceProfile::new(prefs).expect("orders share the outcome set"))
    } else {
        None
    };

    Ok(GameFile {
        game,
        outcomes,
        preferences,
    })
}

/// Renders a game file. Explicit `cycles` entries are written only for
/// outcomes whose label or component set differs from the default.
///
/// The format numbers positions before terminals, so structures built with
/// terminals interleaved among positions do not round-trip vertex ids.
pub fn print_game_file(gf: &GameFile) -> String {
    let gs = &gf.game;
    let g = gs.graph();
    let mut out = String::new();
    let _ = writeln!(out, "players: {}", gs.players());
    let positions: Vec<String> = g
        .vertices()
        .filter_map(|v| gs.owner(v).map(|p| format!("{}:{}", g.name(v), p + 1)))
        .collect();
    let _ = writeln!(out, "{}", header_line("positions", &positions));
    let terminals: Vec<String> = g
        .vertices()
        .filter(|&v| gs.is_terminal(v))
        .map(|v| g.name(v).to_string())
        .collect();
    let _ = writeln!(out, "{}", header_line("terminals", &terminals));
    let _ = writeln!(out, "initial: {}", g.name(gs.initial()));
    out.push_str("edges:\n");
    for &(t, h) in g.edges() {
        let _ = writeln!(out, "  {} -> {}", g.name(t), g.name(h));
    }

    let defaults = build_outcomes(gs);
    let mut cycles = Vec::new();
    for o in gf.outcomes.outcomes() {
        let default_label = defaults
            .outcome_of_component(o.components[0])
            .map(|d| defaults.label(d));
        if o.components.len() == 1 && default_label == Some(o.label.as_str()) {
            continue;
        }
        for &j in &o.components {
            let names: Vec<&str> = gs.scc().component(j).iter().map(|&v| g.name(v)).collect();
            cycles.push(format!("  {} = {{{}}}", o.label, names.join(", ")));
        }
    }
    if !cycles.is_empty() {
        out.push_str("cycles:\n");
        for c in cycles {
            let _ = writeln!(out, "{c}");
        }
    }
    if let Some(pp) = &gf.preferences {
        out.push_str("preferences:\n");
        for line in pp.display(&gf.outcomes).lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    out
}

fn header_line(keyword: &str, items: &[String]) -> String {
    if items.is_empty() {
        format!("{keyword}:")
    } else {
        format!("{keyword}: {}", items.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLACKMAIL: &str = "\
players: 2
positions: s:1 v:2
terminals: t t' t''
initial: s
edges:
  s -> v
  s -> t
  v -> t'
  v -> t''
preferences:
  1: t' > t > t''
  2: t > t' > t''
";

    #[test]
    fn tokens() {
        let t: Vec<&str> = tokenize("  a->b c = {x,y} 1: p>q").iter().map(|t| t.text).collect();
        assert_eq!(t, ["a", "->", "b", "c", "=", "{", "x", ",", "y", "}", "1", ":", "p", ">", "q"]);
        assert_eq!(tokenize("  x")[0].col, 3);
    }

    #[test]
    fn blackmail_round_trip() {
        let gf = parse_game_file(BLACKMAIL).unwrap();
        assert_eq!(gf.game.graph().vertex_count(), 5);
        assert_eq!(gf.outcomes.labels(), ["t", "t'", "t''"]);
        assert_eq!(print_game_file(&gf), BLACKMAIL);
        assert_eq!(parse_game_file(&print_game_file(&gf)).unwrap(), gf);
    }

    #[test]
    fn minimal_game() {
        let gf = parse_game_file("players: 1\npositions: s:1\nterminals: t\ninitial: s\nedges: s -> t\n").unwrap();
        assert_eq!(gf.game.players(), 1);
        assert_eq!(gf.game.graph().edge_count(), 1);
        assert!(gf.preferences.is_none());
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "# header\nplayers:2 # two\n positions :  s : 1   v:2\nterminals: t\ninitial: s\nedges:\n s->v\n\n v -> s\n s -> t\n";
        let gf = parse_game_file(text).unwrap();
        assert_eq!(gf.outcomes.labels(), ["c1", "t"]);
    }

    #[test]
    fn cycle_labels_and_merges() {
        let base = "players: 1\npositions: s:1 u:1 v:1 w:1\nterminals: t\ninitial: s\nedges:\n s -> u\n u -> v\n v -> u\n s -> w\n w -> w\n w -> t\n u -> t\n";
        let gf = parse_game_file(base).unwrap();
        assert_eq!(gf.outcomes.labels(), ["c1", "c2", "t"]);
        let named = format!("{base}cycles:\n  loop = {{w}}\n");
        let gf = parse_game_file(&named).unwrap();
        assert_eq!(gf.outcomes.labels(), ["c1", "loop", "t"]);
        assert_eq!(parse_game_file(&print_game_file(&gf)).unwrap(), gf);
        let merged = format!("{base}cycles:\n  c = {{u, v}}\n  c = {{w}}\n");
        let gf = parse_game_file(&merged).unwrap();
        assert_eq!(gf.outcomes.labels(), ["c", "t"]);
        assert_eq!(print_game_file(&gf).matches("c = ").count(), 2);
        assert_eq!(parse_game_file(&print_game_file(&gf)).unwrap(), gf);
        let bad = format!("{base}cycles:\n  c = {{u, w}}\n");
        assert_eq!(
            parse_game_file(&bad),
            Err(GameFileError::CycleLabelMismatch {
                line: 14,
                label: "c".into()
            })
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_game_file("players: 1\npositions: s:1\nterminals: t\ninitial: s\nedges:\n  s -> x\n");
        assert_eq!(
            e,
            Err(GameFileError::UnknownVertex {
                line: 6,
                col: 8,
                name: "x".into()
            })
        );
        let e = parse_game_file("players: 1\npositions: s:1\nterminals: t\ninitial: s\nedges:\n  s t\n");
        assert!(matches!(e, Err(GameFileError::Syntax { line: 6, col: 5, .. })));
        let e = parse_game_file("players: 1\nterminals: t\n");
        assert!(matches!(e, Err(GameFileError::Syntax { line: 2, col: 1, .. })));
        let e = parse_game_file("players: 1\npositions: s:1\nterminals: t\ninitial: s\n");
        assert!(matches!(e, Err(GameFileError::Syntax { line: 5, .. })));
        let e = parse_game_file("players: 1\npositions: s:1\nterminals: t\ninitial: s\nedges:\n s -> s\n");
        assert!(e.is_ok());
        let e = parse_game_file("players: 1\npositions: s:1 v:1\nterminals: t\ninitial: s\nedges:\n s -> t\n");
        assert!(matches!(e, Err(GameFileError::ValidationFailed(_))));
        let e = parse_game_file(&format!("{BLACKMAIL}  3: t > t' > t''\n"));
        assert!(matches!(e, Err(GameFileError::Preference { line: 13, .. })));
        let e = parse_game_file("players: 2\npositions: s:1 v:2\nterminals: t\ninitial: s\nedges:\n s -> v\n v -> t\npreferences:\n 1: t\n");
        assert!(matches!(e, Err(GameFileError::Syntax { .. })));
    }
}
