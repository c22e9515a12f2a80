//! DIMACS CNF text with structured comments.
//!
//! Preference encodings carry their variable map and per-clause provenance
//! in `c` lines so that a parsed file renders back byte-identically:
//!
//! ```text
//! c players 3
//! c outcomes c1 c2 c3 a1 a2
//! c var 1 player 1 c1 c2
//! c clause 1 acyclicity player 1 c1 c2 c3
//! c clause 61 ne-free situation 0
//! p cnf 30 252
//! ```
//!
//! Other comments are ignored on input.

use thiserror::Error;

use super::{Assignment, Cnf, Lit, Provenance, VarMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("model leaves variable {0} unassigned")]
    Unassigned(usize),
}

fn syntax(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn to_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    if let Some(vars) = cnf.vars() {
        let labels = vars.labels();
        out.push_str(&format!("c players {}\n", vars.players()));
        out.push_str(&format!("c outcomes {}\n", labels.join(" ")));
        for v in 1..=vars.count() {
            let pv = vars.decode(v);
            out.push_str(&format!(
                "c var {v} player {} {} {}\n",
                pv.player + 1,
                labels[pv.low],
                labels[pv.high]
            ));
        }
    }
    for (i, p) in cnf.provenance().iter().enumerate() {
        let n = i + 1;
        match p {
            Provenance::Acyclicity { player, triple } => {
                let labels = cnf.vars().map(|v| v.labels());
                let name = |o: usize| labels.map_or_else(|| o.to_string(), |l| l[o].clone());
                out.push_str(&format!(
                    "c clause {n} acyclicity player {} {} {} {}\n",
                    player + 1,
                    name(triple[0]),
                    name(triple[1]),
                    name(triple[2])
                ));
            }
            Provenance::NeFree { situation } => {
                out.push_str(&format!("c clause {n} ne-free situation {situation}\n"));
            }
            Provenance::Blocking => out.push_str(&format!("c clause {n} blocking\n")),
            Provenance::Input => {}
        }
    }
    out.push_str(&format!("p cnf {} {}\n", cnf.var_count(), cnf.len()));
    for c in cnf.clauses() {
        for l in c {
            out.push_str(&l.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize, DimacsError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| syntax(line, format!("expected {what}")))
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut players: Option<usize> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut provenance: Vec<(usize, Provenance, usize)> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == "%" {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
                return Err(syntax(line, "unexpected token"));
            }
            let mut toks = rest.split_whitespace();
            match toks.next() {
                Some("players") if header.is_none() => {
                    players = Some(parse_usize(toks.next(), line, "player count")?);
                }
                Some("outcomes") if header.is_none() => {
                    labels = Some(toks.map(String::from).collect());
                }
                Some("clause") if header.is_none() => {
                    let n = parse_usize(toks.next(), line, "clause number")?;
                    let p = match toks.next() {
                        Some("acyclicity") => {
                            if toks.next() != Some("player") {
                                return Err(syntax(line, "expected `player`"));
                            }
                            let player = parse_usize(toks.next(), line, "player")?;
                            if player == 0 {
                                return Err(syntax(line, "players are numbered from 1"));
                            }
                            let mut triple = [0usize; 3];
                            for t in triple.iter_mut() {
                                let tok = toks.next().ok_or_else(|| syntax(line, "expected outcome"))?;
                                *t = match &labels {
                                    Some(l) => l
                                        .iter()
                                        .position(|x| x == tok)
                                        .ok_or_else(|| syntax(line, format!("unknown outcome `{tok}`")))?,
                                    None => tok.parse().map_err(|_| syntax(line, "expected outcome"))?,
                                };
                            }
                            Provenance::Acyclicity {
                                player: player - 1,
                                triple,
                            }
                        }
                        Some("ne-free") => {
                            if toks.next() != Some("situation") {
                                return Err(syntax(line, "expected `situation`"));
                            }
                            Provenance::NeFree {
                                situation: parse_usize(toks.next(), line, "situation")?,
                            }
                        }
                        Some("blocking") => Provenance::Blocking,
                        _ => return Err(syntax(line, "unknown clause provenance")),
                    };
                    provenance.push((n, p, line));
                }
                _ => {}
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("p ") {
            if header.is_some() {
                return Err(syntax(line, "duplicate header"));
            }
            let mut toks = rest.split_whitespace();
            if toks.next() != Some("cnf") {
                return Err(syntax(line, "expected `p cnf`"));
            }
            let v = parse_usize(toks.next(), line, "variable count")?;
            let c = parse_usize(toks.next(), line, "clause count")?;
            if toks.next().is_some() {
                return Err(syntax(line, "trailing tokens in header"));
            }
            header = Some((v, c));
            continue;
        }
        let (vars, _) = header.ok_or_else(|| syntax(line, "clause before header"))?;
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| syntax(line, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(syntax(line, format!("literal {lit} exceeds variable count")));
            } else {
                current.push(lit as Lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let (var_count, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }

    let mut cnf = Cnf::new(var_count);
    if let (Some(p), Some(l)) = (players, labels) {
        let vars = VarMap::new(p, l);
        if vars.count() == var_count {
            cnf.vars = Some(vars);
        }
    }
    let mut tags = vec![Provenance::Input; clauses.len()];
    for (n, p, line) in provenance {
        if n == 0 || n > clauses.len() {
            return Err(syntax(line, format!("clause {n} does not exist")));
        }
        tags[n - 1] = p;
    }
    for (c, p) in clauses.into_iter().zip(tags) {
        cnf.push(c, p);
    }
    Ok(cnf)
}

/// Reads a model as printed by common solvers: integer literals, optionally
/// on `v` lines, with `s` and `c` lines ignored and `0` as terminator.
pub fn parse_model(text: &str, var_count: usize) -> Result<Assignment, DimacsError> {
    let mut values: Vec<Option<bool>> = vec![None; var_count];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace().peekable();
        match toks.peek() {
            None | Some(&"s") | Some(&"c") => continue,
            Some(&"v") => {
                toks.next();
            }
            _ => {}
        }
        for tok in toks {
            let lit: i64 = tok
                .parse()
                .map_err(|_| syntax(line, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                continue;
            }
            let v = lit.unsigned_abs() as usize;
            if v > var_count {
                return Err(syntax(line, format!("literal {lit} exceeds variable count")));
            }
            values[v - 1] = Some(lit > 0);
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(DimacsError::Unassigned(i + 1)))
        .collect::<Result<Vec<_>, _>>()
        .map(Assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_round_trip() {
        let cnf = Cnf::from_clauses(3, vec![vec![1, -2], vec![3], vec![-1, 2, -3]]);
        let text = to_dimacs(&cnf);
        assert_eq!(text, "p cnf 3 3\n1 -2 0\n3 0\n-1 2 -3 0\n");
        assert_eq!(parse_dimacs(&text).unwrap(), cnf);
    }

    #[test]
    fn accepts_common_variations() {
        let text = "c hello\np cnf 2 2\n1\n 2 0 -1 -2 0\n%\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.clauses(), &[vec![1, 2], vec![-1, -2]]);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_dimacs("1 0\n"), Err(syntax(1, "clause before header")));
        assert_eq!(parse_dimacs(""), Err(DimacsError::MissingHeader));
        assert!(matches!(
            parse_dimacs("p cnf 1 2\n1 0\n"),
            Err(DimacsError::ClauseCount { declared: 2, found: 1 })
        ));
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\nx 0\n").is_err());
    }

    #[test]
    fn model_parsing() {
        let a = parse_model("s SATISFIABLE\nv 1 -2\nv 3 0\n", 3).unwrap();
        assert_eq!(a.0, vec![true, false, true]);
        assert_eq!(parse_model("-1 2 0", 2).unwrap().0, vec![false, true]);
        assert_eq!(parse_model("1 0", 2), Err(DimacsError::Unassigned(2)));
        assert_eq!(Assignment(vec![true, false]).to_model_line(), "v 1 -2 0");
    }
}
