use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lensgrid::engine::{evaluate, EngineError, EvalConfig};
use lensgrid::metrics::scr;
use lensgrid::moves::{self, Corner, Move, MoveError};
use lensgrid::trivial::{build_trivial_diagram, IndexSet, Normalization, TrivialError};
use lensgrid::{Cell, DiagramError, GridDiagram, MarkKind, Marking};
use serde_json::json;
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "lensgrid",
    version,
    about = "Grid diagrams of links in lens spaces and their skein invariant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    CommuteCols,
    CommuteRows,
    Stabilize,
    Destabilize,
    Resolve,
    CrossingChange,
}

#[derive(Args)]
struct EvalArgs {
    file: PathBuf,
    /// Write the principal reduction trace here (JSON).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the skein tree here (DOT if the name ends in .dot, else JSON).
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Table of trivial link values overriding the default normalization.
    #[arg(long)]
    normalization: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram document.
    Validate {
        file: PathBuf,
    },
    /// Grid number, components, homology classes and scr.
    Info {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// The p-fold lift as a diagram in S^3.
    Lift {
        file: PathBuf,
    },
    Scr {
        file: PathBuf,
    },
    /// The trivial link diagram of an index set.
    Trivial {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        /// Multiplicities m0,...,m{p-1}.
        #[arg(long, value_delimiter = ',')]
        index: Vec<u32>,
    },
    /// Apply one grid move and print the resulting diagram.
    Move {
        file: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        /// Column or row index; `KIND,STRIP,ROW,CORNER` for stabilize; three
        /// `KIND,STRIP,ROW` markings (A, B, C) for destabilize.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Evaluate the invariant.
    Homfly(EvalArgs),
    /// Export the skein tree.
    Tree(EvalArgs),
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl From<DiagramError> for CliError {
    fn from(e: DiagramError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TrivialError> for CliError {
    fn from(e: TrivialError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MoveError> for CliError {
    fn from(e: MoveError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Diagram(d) => d.into(),
            EngineError::NotAligned(..) => CliError::Input(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<GridDiagram, CliError> {
    GridDiagram::from_json(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("bad {what} {s:?}")))
}

fn parse_marking(parts: &[&str]) -> Result<Marking, CliError> {
    let kind = match parts[0].trim() {
        "O" | "o" => MarkKind::O,
        "X" | "x" => MarkKind::X,
        other => return Err(CliError::Input(format!("bad marking kind {other:?}"))),
    };
    Ok(Marking::new(
        kind,
        Cell::new(parse_num(parts[1], "strip")?, parse_num(parts[2], "row")?),
    ))
}

fn parse_move(op: Op, at: &str) -> Result<Move, CliError> {
    let parts: Vec<&str> = at.split(',').collect();
    let index = || parse_num::<usize>(at, "index");
    Ok(match op {
        Op::CommuteCols => Move::ColumnCommute { column: index()? },
        Op::CommuteRows => Move::RowCommute { row: index()? },
        Op::Resolve => Move::Resolve { column: index()? },
        Op::CrossingChange => Move::CrossingChange { column: index()? },
        Op::Stabilize => {
            if parts.len() != 4 {
                return Err(CliError::Input("stabilize expects --at KIND,STRIP,ROW,CORNER".into()));
            }
            let corner: Corner = parts[3].trim().parse().map_err(CliError::Input)?;
            Move::Stabilize {
                mark: parse_marking(&parts[..3])?,
                corner,
            }
        }
        Op::Destabilize => {
            if parts.len() != 9 {
                return Err(CliError::Input("destabilize expects --at K,S,R,K,S,R,K,S,R".into()));
            }
            Move::Destabilize {
                a: parse_marking(&parts[0..3])?,
                b: parse_marking(&parts[3..6])?,
                c: parse_marking(&parts[6..9])?,
            }
        }
    })
}

fn document(d: &GridDiagram) -> String {
    d.to_json()
}

fn info(d: &GridDiagram, format: Format) -> String {
    let comps = d.components();
    let mus: Vec<u32> = comps.components.iter().map(|c| c.mu).collect();
    let gns: Vec<usize> = comps.components.iter().map(|c| c.grid_number).collect();
    let s = scr(d);
    if format == Format::Json {
        let list: Vec<_> = comps
            .components
            .iter()
            .map(|c| json!({"grid_number": c.grid_number, "mu": c.mu}))
            .collect();
        return serde_json::to_string_pretty(&json!({
            "p": d.p(), "q": d.q(), "n": d.n(), "components": list, "scr": s
        }))
        .expect("json");
    }
    let join = |v: Vec<String>| v.join(",");
    format!(
        "p={} q={} n={}\ncomponents={}\nmu={}\ngrid_numbers={}\nscr={}",
        d.p(),
        d.q(),
        d.n(),
        comps.len(),
        join(mus.iter().map(|m| m.to_string()).collect()),
        join(gns.iter().map(|g| g.to_string()).collect()),
        s
    )
}

fn run_eval(args: &EvalArgs, tree_cmd: bool) -> Result<String, CliError> {
    let d = load(&args.file)?;
    let normalization = match &args.normalization {
        Some(path) => Some(Normalization::from_json(&read(path)?)?),
        None => None,
    };
    let config = EvalConfig { normalization };
    let e = evaluate(&d, &config)?;
    e.tree
        .verify(config.normalization.as_ref())
        .map_err(CliError::Internal)?;
    if let Some(path) = &args.trace {
        write(path, &serde_json::to_string_pretty(&e.trace()).expect("json"))?;
    }
    if let Some(path) = &args.tree {
        let dot = path.extension().is_some_and(|x| x == "dot");
        write(path, &if dot { e.tree.to_dot() } else { e.tree.to_json() })?;
    }
    if tree_cmd {
        return Ok(match args.format.unwrap_or(Format::Json) {
            Format::Dot | Format::Text => e.tree.to_dot().trim_end().to_string(),
            Format::Json => e.tree.to_json(),
        });
    }
    Ok(match args.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&json!({
            "value": e.value.to_string(),
            "u_bound": e.u_bound(),
            "nodes": e.tree.nodes.len(),
            "branches": e.tree.branches.len(),
        }))
        .expect("json"),
        _ => e.value.to_string(),
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Validate { file } => {
            let d = load(&file)?;
            Ok(format!("valid: p={} q={} n={}", d.p(), d.q(), d.n()))
        }
        Command::Info { file, format } => Ok(info(&load(&file)?, format)),
        Command::Lift { file } => Ok(document(&load(&file)?.lift())),
        Command::Scr { file } => Ok(scr(&load(&file)?).to_string()),
        Command::Trivial { p, q, index } => {
            let idx = IndexSet::new(p, q, index)?;
            Ok(document(&build_trivial_diagram(&idx)?))
        }
        Command::Move { file, op, at } => {
            let d = load(&file)?;
            let mv = parse_move(op, &at)?;
            Ok(document(&moves::apply(&d, &mv)?))
        }
        Command::Homfly(args) => run_eval(&args, false),
        Command::Tree(args) => run_eval(&args, true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
