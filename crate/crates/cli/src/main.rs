use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dgg_core::equilibrium::{
    all_ne, annotate, brute_force_ne_free_count, brute_force_ne_free_profiles, construct_ne_play_once_c0, SearchCaps,
};
use dgg_core::fixtures::verify_paper;
use dgg_core::game::{normal_form, outcome_of, StrategySpace, DEFAULT_CELL_CAP};
use dgg_core::gamefile::{parse_game_file, print_game_file, GameFile};
use dgg_core::preference::{cnd_c0, cnd_c22, kind_name, merge_cyclic, project_profile, rank_vector, PreferenceProfile};
use dgg_core::sat::{self, Cnf};

#[derive(Parser)]
#[command(name = "dgg", version, about = "Deterministic graphical games: equilibria, NE-free searches and SAT encodings")]
struct Cli {
    /// Worker threads for parallel enumerations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Components, outcomes, strategy counts, rank vector and conditions.
    Analyze { file: PathBuf },
    /// Print the rank vector of the file's preference profile.
    Rank { file: PathBuf },
    /// Print the normal form, annotated with improving players when the
    /// file has preferences.
    NormalForm {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List all Nash equilibria, or certify that there are none.
    Ne { file: PathBuf },
    /// Merge all cyclic outcomes into one and print the resulting game file.
    Merge {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Search all preference profiles for ones without an equilibrium.
    Brute {
        file: PathBuf,
        /// Print only the number of NE-free profiles.
        #[arg(long)]
        count_only: bool,
        /// Search the game with all cyclic outcomes merged.
        #[arg(long)]
        merged: bool,
    },
    /// SAT encoding of "some preference profile is NE-free".
    Sat {
        #[command(subcommand)]
        command: SatCommand,
    },
    /// Equilibrium of a play-once game under condition C0.
    PlayOnceSolve { file: PathBuf },
    /// Reproduce the bundled three-person counterexample and blackmail example.
    VerifyPaper,
}

#[derive(Subcommand)]
enum SatCommand {
    /// Write the CNF in DIMACS format.
    Encode {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
        /// Drop clauses that repeat an earlier one.
        #[arg(long)]
        dedup: bool,
    },
    /// Solve a game's encoding (or a `.cnf` file) and decode the model.
    Solve { input: PathBuf },
    /// List every model, each decoded to a preference profile.
    Enumerate {
        input: PathBuf,
        /// Stop with an error after this many models.
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
        /// Print only the number of models.
        #[arg(long)]
        count_only: bool,
    },
    /// Decode a solver model for a game's encoding.
    Decode { file: PathBuf, model: PathBuf },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
    Cells,
}

/// An error in the user's input; exits with status 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

fn input<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(InputError(e.into())))
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn cell_cap() -> Result<usize> {
    match std::env::var("DGG_CELL_CAP") {
        Ok(v) => input(v.trim().parse::<usize>().with_context(|| format!("DGG_CELL_CAP=`{v}` is not a number"))),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

fn load(path: &Path) -> Result<GameFile> {
    let text = input(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))?;
    input(parse_game_file(&text).with_context(|| format!("{}", path.display())))
}

fn preferences(gf: &GameFile) -> Result<&PreferenceProfile> {
    gf.preferences
        .as_ref()
        .ok_or_else(|| anyhow!(InputError(anyhow!("the game file has no preferences section"))))
}

fn emit(text: &str, output: &Output) -> Result<()> {
    match &output.output {
        Some(path) => input(fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(cli.command);
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let mut out = String::new();
    match command {
        Command::Analyze { file } => analyze(&load(&file)?, &mut out)?,
        Command::Rank { file } => {
            let gf = load(&file)?;
            let r = rank_vector(&gf.outcomes, preferences(&gf)?);
            writeln!(out, "r = {r}")?;
        }
        Command::NormalForm { file, format } => render_normal_form(&load(&file)?, format, &mut out)?,
        Command::Ne { file } => equilibria(&load(&file)?, &mut out)?,
        Command::Merge { file, output } => {
            let gf = load(&file)?;
            let merged = input(merge_cyclic(&gf.outcomes))?;
            let projected = gf.preferences.as_ref().and_then(|pp| {
                let p = project_profile(pp, &gf.outcomes.map_into(&merged), merged.len());
                if p.is_none() {
                    eprintln!("note: preferences split the cyclic outcomes and are dropped");
                }
                p
            });
            let text = print_game_file(&GameFile {
                game: gf.game,
                outcomes: merged,
                preferences: projected,
            });
            emit(&text, &output)?;
        }
        Command::Brute {
            file,
            count_only,
            merged,
        } => {
            let gf = load(&file)?;
            let os = if merged { input(merge_cyclic(&gf.outcomes))? } else { gf.outcomes.clone() };
            let caps = SearchCaps {
                cells: cell_cap()?,
                ..SearchCaps::default()
            };
            if count_only {
                let n = input(brute_force_ne_free_count(&gf.game, &os, caps))?;
                writeln!(out, "{n}")?;
            } else {
                let found = input(brute_force_ne_free_profiles(&gf.game, &os, caps))?;
                for (i, pp) in found.iter().enumerate() {
                    writeln!(out, "# profile {}", i + 1)?;
                    writeln!(out, "{}", pp.display(&os))?;
                }
                writeln!(out, "NE-free profiles: {}", found.len())?;
            }
        }
        Command::Sat { command } => return sat_command(command, &mut out),
        Command::PlayOnceSolve { file } => {
            let gf = load(&file)?;
            let pp = preferences(&gf)?;
            let sol = input(construct_ne_play_once_c0(&gf.game, &gf.outcomes, pp, cell_cap()?))?;
            let o = outcome_of(&gf.game, &gf.outcomes, &sol.profile);
            writeln!(out, "{} -> {}", sol.profile.display(gf.game.graph()), gf.outcomes.label(o))?;
            if sol.fallback {
                writeln!(out, "note: found by exhaustive search")?;
            }
        }
        Command::VerifyPaper => {
            let report = verify_paper();
            print!("{report}");
            return Ok(if report.passed() {
                println!("all checks passed");
                ExitCode::SUCCESS
            } else {
                println!("verification FAILED");
                ExitCode::FAILURE
            });
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn analyze(gf: &GameFile, out: &mut String) -> Result<()> {
    let gs = &gf.game;
    let g = gs.graph();
    let os = &gf.outcomes;
    writeln!(
        out,
        "vertices: {}, edges: {}, players: {}, initial: {}",
        g.vertex_count(),
        g.edge_count(),
        gs.players(),
        g.name(gs.initial())
    )?;
    writeln!(out, "components:")?;
    let scc = gs.scc();
    for j in 0..scc.len() {
        let names: Vec<&str> = scc.component(j).iter().map(|&v| g.name(v)).collect();
        let outcome = os.outcome_of_component(j).map_or("-".to_string(), |o| os.label(o).to_string());
        writeln!(out, "  {j}: {{{}}} {} {outcome}", names.join(", "), scc.class(j))?;
    }
    writeln!(out, "outcomes:")?;
    for o in 0..os.len() {
        writeln!(out, "  {} {}", os.label(o), kind_name(os.kind(o)))?;
    }
    let space = StrategySpace::new(gs);
    let counts: Vec<String> = space.counts().iter().map(|c| c.to_string()).collect();
    let total = space.total().map_or("overflow".to_string(), |t| t.to_string());
    writeln!(out, "strategies: {} (situations: {total})", counts.join(" x "))?;
    if let Some(pp) = &gf.preferences {
        writeln!(out, "preferences:")?;
        for line in pp.display(os).lines() {
            writeln!(out, "  {line}")?;
        }
        writeln!(out, "r = {}", rank_vector(os, pp))?;
        writeln!(out, "C0: {}", cnd_c0(os, pp))?;
        writeln!(out, "C22: {}", cnd_c22(os, pp))?;
        if let Ok(merged) = merge_cyclic(os) {
            match project_profile(pp, &os.map_into(&merged), merged.len()) {
                Some(mp) => {
                    writeln!(out, "r' = {}", rank_vector(&merged, &mp))?;
                    writeln!(out, "C0': {}", cnd_c0(&merged, &mp))?;
                    writeln!(out, "C22': {}", cnd_c22(&merged, &mp))?;
                }
                None => writeln!(out, "merged conditions: undefined, cyclic outcomes are not contiguous")?,
            }
        }
    }
    Ok(())
}

fn improvers_text(ps: &[usize]) -> String {
    ps.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(",")
}

#[allow(clippy::needless_range_loop)]
fn render_normal_form(gf: &GameFile, format: Format, out: &mut String) -> Result<()> {
    let gs = &gf.game;
    let os = &gf.outcomes;
    let nf = input(normal_form(gs, os, cell_cap()?))?;
    let annotations = gf.preferences.as_ref().map(|pp| annotate(&nf, pp));
    let space = StrategySpace::new(gs);
    let names: Vec<Vec<String>> = (0..gs.players())
        .map(|i| {
            (0..space.count(i))
                .map(|k| space.strategy(gs, i, k).display(gs.graph()).to_string())
                .collect()
        })
        .collect();
    let cell = |index: usize| -> String {
        let o = os.label(nf.outcome(index));
        match &annotations {
            Some(a) => format!("{o}^{{{}}}", improvers_text(&a[index].improvers())),
            None => o.to_string(),
        }
    };
    let n = gs.players();
    match format {
        Format::Cells => {
            // Table order: later players select subtables, then
            // player 1 rows, then player 2 columns.
            for index in table_order(nf.shape()) {
                let coords = nf.coords(index);
                let parts: Vec<&str> = coords.iter().enumerate().map(|(i, &k)| names[i][k].as_str()).collect();
                writeln!(out, "{} -> {}", parts.join(" | "), cell(index))?;
            }
        }
        Format::Tsv => {
            let mut header: Vec<String> = (1..=n).map(|i| format!("player{i}")).collect();
            header.push("outcome".into());
            if annotations.is_some() {
                header.push("improvers".into());
            }
            writeln!(out, "{}", header.join("\t"))?;
            for index in 0..nf.len() {
                let coords = nf.coords(index);
                let mut row: Vec<String> = coords.iter().enumerate().map(|(i, &k)| names[i][k].clone()).collect();
                row.push(os.label(nf.outcome(index)).to_string());
                if let Some(a) = &annotations {
                    row.push(improvers_text(&a[index].improvers()));
                }
                writeln!(out, "{}", row.join("\t"))?;
            }
        }
        Format::Text => {
            let rows = nf.shape()[0];
            let cols = if n >= 2 { nf.shape()[1] } else { 1 };
            let tables = nf.len() / (rows * cols).max(1);
            for t in 0..tables {
                if n > 2 {
                    let mut rest = t;
                    let mut sel = Vec::new();
                    for i in (2..n).rev() {
                        sel.push(format!("player {}: {}", i + 1, names[i][rest % nf.shape()[i]]));
                        rest /= nf.shape()[i];
                    }
                    sel.reverse();
                    if t > 0 {
                        writeln!(out)?;
                    }
                    writeln!(out, "{}", sel.join(", "))?;
                }
                let mut grid: Vec<Vec<String>> = Vec::new();
                let mut head = vec![String::new()];
                if n >= 2 {
                    head.extend(names[1].iter().cloned());
                } else {
                    head.push(String::new());
                }
                grid.push(head);
                for r in 0..rows {
                    let mut line = vec![names[0][r].clone()];
                    for c in 0..cols {
                        let mut coords = vec![r];
                        if n >= 2 {
                            coords.push(c);
                        }
                        let mut rest = t;
                        let mut tail = Vec::new();
                        for i in (2..n).rev() {
                            tail.push(rest % nf.shape()[i]);
                            rest /= nf.shape()[i];
                        }
                        tail.reverse();
                        coords.extend(tail);
                        line.push(cell(nf.index(&coords)));
                    }
                    grid.push(line);
                }
                let widths: Vec<usize> = (0..grid[0].len())
                    .map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
                    .collect();
                for row in grid {
                    let padded: Vec<String> = row
                        .iter()
                        .zip(&widths)
                        .map(|(s, &w)| format!("{s:<w$}"))
                        .collect();
                    writeln!(out, "{}", padded.join("  ").trim_end())?;
                }
            }
        }
    }
    Ok(())
}

/// Cell indices ordered by players 3.. (subtable), then player 1, then 2.
fn table_order(shape: &[usize]) -> Vec<usize> {
    let n = shape.len();
    let mut order: Vec<usize> = (2..n).collect();
    order.extend((0..n.min(2)).collect::<Vec<_>>());
    let total: usize = shape.iter().product();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    (0..total)
        .map(|mut k| {
            let mut index = 0;
            for &i in order.iter().rev() {
                index += (k % shape[i]) * strides[i];
                k /= shape[i];
            }
            index
        })
        .collect()
}

fn equilibria(gf: &GameFile, out: &mut String) -> Result<()> {
    let gs = &gf.game;
    let os = &gf.outcomes;
    let pp = preferences(gf)?;
    let nf = input(normal_form(gs, os, cell_cap()?))?;
    let space = StrategySpace::new(gs);
    let annotations = annotate(&nf, pp);
    let ne: Vec<_> = annotations.iter().filter(|a| a.improvements.is_empty()).collect();
    if ne.is_empty() {
        writeln!(out, "NE-FREE: every situation has an improving player")?;
        for a in &annotations {
            let x = space.profile(gs, &a.coords);
            let (player, witness, to) = a.improvements[0];
            writeln!(
                out,
                "{} -> {}: player {} switches to {} -> {}",
                x.display(gs.graph()),
                os.label(a.outcome),
                player + 1,
                space.strategy(gs, player, witness).display(gs.graph()),
                os.label(to)
            )?;
        }
    } else {
        writeln!(out, "equilibria: {}", ne.len())?;
        for a in ne {
            let x = space.profile(gs, &a.coords);
            writeln!(out, "{} -> {}", x.display(gs.graph()), os.label(a.outcome))?;
        }
    }
    Ok(())
}

fn is_dimacs_path(p: &Path) -> bool {
    matches!(p.extension().and_then(|e| e.to_str()), Some("cnf" | "dimacs"))
}

/// The CNF to solve and, for game inputs, the game it encodes.
fn sat_input(path: &Path) -> Result<(Cnf, Option<GameFile>)> {
    if is_dimacs_path(path) {
        let text = input(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))?;
        let cnf = input(sat::parse_dimacs(&text).with_context(|| format!("{}", path.display())))?;
        return Ok((cnf, None));
    }
    let gf = load(path)?;
    let cnf = input(sat::encode(&gf.game, &gf.outcomes, cell_cap()?))?;
    Ok((cnf, Some(gf)))
}

fn describe_model(cnf: &Cnf, model: &sat::Assignment, game: Option<&GameFile>, out: &mut String) -> Result<()> {
    writeln!(out, "{}", model.to_model_line())?;
    if cnf.vars().is_none() {
        return Ok(());
    }
    let pp = input(sat::decode_model(cnf, model))?;
    match game {
        Some(gf) => {
            writeln!(out, "{}", pp.display(&gf.outcomes))?;
            let ne = input(all_ne(&gf.game, &gf.outcomes, &pp, cell_cap()?))?;
            if ne.is_empty() {
                writeln!(out, "verified: NE-free")?;
            } else {
                writeln!(out, "verification failed: equilibrium {}", ne[0].display(gf.game.graph()))?;
            }
        }
        None => {
            let vars = cnf.vars().expect("checked above");
            let labels = vars.labels();
            for (i, p) in pp.preferences().iter().enumerate() {
                let order: Vec<&str> = p.order().iter().map(|&o| labels[o].as_str()).collect();
                writeln!(out, "{}: {}", i + 1, order.join(" > "))?;
            }
        }
    }
    Ok(())
}

fn sat_command(command: SatCommand, out: &mut String) -> Result<ExitCode> {
    match command {
        SatCommand::Encode { file, output, dedup } => {
            let gf = load(&file)?;
            let mut cnf = input(sat::encode(&gf.game, &gf.outcomes, cell_cap()?))?;
            if dedup {
                cnf = cnf.dedup();
            }
            emit(&sat::to_dimacs(&cnf), &output)?;
            return Ok(ExitCode::SUCCESS);
        }
        SatCommand::Solve { input: path } => {
            let (cnf, gf) = sat_input(&path)?;
            match sat::solve(&cnf) {
                sat::SolveResult::Unsat => writeln!(out, "s UNSATISFIABLE")?,
                sat::SolveResult::Sat(model) => {
                    writeln!(out, "s SATISFIABLE")?;
                    describe_model(&cnf, &model, gf.as_ref(), out)?;
                }
            }
        }
        SatCommand::Enumerate {
            input: path,
            limit,
            count_only,
        } => {
            let (cnf, gf) = sat_input(&path)?;
            let models = input(sat::enumerate_models(&cnf, limit))?;
            if !count_only {
                for (i, m) in models.iter().enumerate() {
                    writeln!(out, "# model {}", i + 1)?;
                    describe_model(&cnf, m, gf.as_ref(), out)?;
                }
            }
            writeln!(out, "models: {}", models.len())?;
        }
        SatCommand::Decode { file, model } => {
            let gf = load(&file)?;
            let cnf = input(sat::encode(&gf.game, &gf.outcomes, cell_cap()?))?;
            let text = input(fs::read_to_string(&model).with_context(|| format!("cannot read {}", model.display())))?;
            let a = input(sat::parse_model(&text, cnf.var_count()))?;
            let pp = input(sat::decode_model(&cnf, &a))?;
            writeln!(out, "{}", pp.display(&gf.outcomes))?;
            writeln!(out, "satisfies encoding: {}", a.satisfies(&cnf))?;
            let ne = input(all_ne(&gf.game, &gf.outcomes, &pp, cell_cap()?))?;
            writeln!(out, "equilibria: {}", ne.len())?;
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}
