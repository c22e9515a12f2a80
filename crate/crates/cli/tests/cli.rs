use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dgg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn dgg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgg"))
        .args(args)
        .env_remove("DGG_CELL_CAP")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn swap_terminals(s: &str) -> String {
    s.replace("a1", "\0").replace("a2", "a1").replace('\0', "a2")
}

#[test]
fn verify_command_passes() {
    let o = dgg(&["verify-paper"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let passes = text.lines().filter(|l| l.starts_with('(') && l[3..].starts_with(" PASS ")).count();
    assert_eq!(passes, 9, "{text}");
    assert!(text.contains("all checks passed"));
}

#[test]
fn rank_of_the_counterexample() {
    let o = dgg(&["rank", &fixture("paper.game")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "r = (1, 2, 1)");
}

#[test]
fn sat_encode_header_and_output_file() {
    let o = dgg(&["sat", "encode", &fixture("paper.game")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "p cnf 30 252"));
    let path = scratch("paper.cnf");
    let o = dgg(&["sat", "encode", &fixture("paper.game"), "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    // The written file solves the same as the game.
    let o = dgg(&["sat", "enumerate", "--count-only", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "models: 295");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["normal-form", "--format", "tsv"],
        vec!["ne"],
        vec!["sat", "encode"],
        vec!["sat", "solve"],
        vec!["analyze"],
    ] {
        let mut full = args.clone();
        let file = fixture("paper.game");
        full.push(&file);
        let a = dgg(&full);
        let b = dgg(&["--jobs", "1"].iter().copied().chain(full.iter().copied()).collect::<Vec<_>>());
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn input_errors_exit_with_status_two() {
    let bad = scratch("bad.game");
    std::fs::write(&bad, "players: 1\npositions: s:1\nterminals: t\ninitial: s\nedges:\n  s -> q\n").unwrap();
    let o = dgg(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 6"), "{err}");

    let o = dgg(&["analyze", "/nonexistent/game"]);
    assert_eq!(o.status.code(), Some(2));

    let bare = scratch("bare.game");
    let text = std::fs::read_to_string(fixture("paper.game")).unwrap();
    std::fs::write(&bare, &text[..text.find("preferences:").unwrap()]).unwrap();
    let o = dgg(&["rank", bare.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no preferences"));
}

#[test]
fn cell_cap_is_configurable() {
    let o = Command::new(env!("CARGO_BIN_EXE_dgg"))
        .args(["normal-form", &fixture("paper.game")])
        .env("DGG_CELL_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn cells_format_matches_the_transcribed_table() {
    let o = dgg(&["normal-form", "--format", "cells", &fixture("paper.game")]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(fixture("paper.table")).unwrap();
    let expected: Vec<String> = table
        .lines()
        .filter(|l| l.contains("->") && !l.starts_with('#'))
        .map(|l| {
            // The table prints a1 and a2 swapped in the outcome column.
            let (situation, outcome) = l.rsplit_once(" -> ").unwrap();
            format!("{situation} -> {}", swap_terminals(outcome))
        })
        .collect();
    let got: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(got.len(), 192);
    assert_eq!(got, expected);
}

#[test]
fn equilibria_listing() {
    let o = dgg(&["ne", &fixture("blackmail.game")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("equilibria: 2\n"), "{text}");
    assert!(text.contains("(s->v) | (v->t') -> t'"));
    assert!(text.contains("(s->t) | (v->t'') -> t"));

    let o = dgg(&["ne", &fixture("paper.game")]);
    let text = stdout(&o);
    assert!(text.starts_with("NE-FREE"));
    assert_eq!(text.lines().count(), 193);
    assert!(text.lines().skip(1).all(|l| l.contains("switches to")));

    let o = dgg(&["play-once-solve", &fixture("blackmail.game")]);
    assert_eq!(stdout(&o), "(s->v) | (v->t') -> t'\n");
}

#[test]
fn brute_force_and_merge() {
    let o = dgg(&["brute", "--count-only", &fixture("paper.game")]);
    assert_eq!(stdout(&o).trim(), "295");
    let o = dgg(&["brute", "--count-only", "--merged", &fixture("paper.game")]);
    assert_eq!(stdout(&o).trim(), "0");

    let merged = scratch("merged.game");
    let o = dgg(&["merge", &fixture("paper.game"), "-o", merged.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&merged).unwrap();
    assert!(text.contains("c = {u1, u2}"));
    assert!(!text.contains("preferences:"));
    let o = dgg(&["normal-form", "--format", "tsv", merged.to_str().unwrap()]);
    assert!(o.status.success());
    let outcomes: std::collections::BTreeSet<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(3).unwrap().to_string())
        .collect();
    assert_eq!(outcomes.into_iter().collect::<Vec<_>>(), ["a1", "a2", "c"]);
}

#[test]
fn sat_solve_and_decode() {
    let o = dgg(&["sat", "solve", &fixture("paper.game")]);
    let text = stdout(&o);
    assert!(text.starts_with("s SATISFIABLE\nv "));
    assert!(text.trim_end().ends_with("verified: NE-free"));
    let model = scratch("model.txt");
    std::fs::write(&model, text.lines().nth(1).unwrap()).unwrap();
    let o = dgg(&["sat", "decode", &fixture("paper.game"), model.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("satisfies encoding: true"));
    assert!(text.contains("equilibria: 0"));

    let o = dgg(&["sat", "solve", &fixture("blackmail.game")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "s UNSATISFIABLE\n");
}
