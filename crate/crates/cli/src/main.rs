use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use termpred::engine::{tree_to_dot, tree_to_json};
use termpred::modes::ModeVerdict;
use termpred::predictor::predict_traced;
use termpred::{
    analyze_all_modes, parse_program, parse_query, PredictorConfig, Program, Pruning, Verdict,
};

#[derive(Parser)]
#[command(name = "termpred", version, about = "Termination prediction for logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict termination of a query, a goal, or every moded query.
    #[command(group(ArgGroup::new("target").required(true).args(["query", "goal", "all_modes"])))]
    Analyze(Analyze),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Analyze {
    /// Program file.
    file: PathBuf,
    /// Moded or concrete query, e.g. "p(i,o)".
    #[arg(long)]
    query: Option<String>,
    /// Concrete goal, e.g. "p(a,X)".
    #[arg(long)]
    goal: Option<String>,
    /// Analyze every most general moded query of every defined predicate.
    #[arg(long, conflicts_with = "trace")]
    all_modes: bool,
    /// Repetition number of the loop check.
    #[arg(short, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value = "variants")]
    pruning: Pruning,
    #[arg(long, default_value_t = 1_000_000)]
    max_nodes: usize,
    /// Time budget in seconds.
    #[arg(long, default_value_t = 240)]
    timeout: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the tree as built at verdict time; JSON if the path ends in
    /// .json, DOT otherwise.
    #[arg(long)]
    trace: Option<PathBuf>,
}

const EXIT_ERROR: u8 = 2;
const EXIT_RESOURCES: u8 = 3;

fn main() -> ExitCode {
    let Command::Analyze(args) = Cli::parse().command;
    match analyze(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn analyze(args: &Analyze) -> Result<u8> {
    let src = std::fs::read_to_string(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let program = parse_program(&src).with_context(|| format!("parsing {}", args.file.display()))?;
    let mut cfg = PredictorConfig::with_r(args.r).pruning(args.pruning);
    cfg.limits.max_nodes = args.max_nodes;
    cfg.limits.time_budget = Duration::from_secs(args.timeout);

    if args.all_modes {
        return all_modes(&program, &cfg, args.format);
    }
    let (text, concrete_only) = match (&args.query, &args.goal) {
        (Some(q), _) => (q, false),
        (_, Some(g)) => (g, true),
        _ => unreachable!("clap requires a target"),
    };
    let query = parse_query(text).with_context(|| format!("parsing query `{text}`"))?;
    if concrete_only && query.is_moded() {
        bail!("--goal takes a concrete goal; use --query for `{text}`");
    }
    let (report, tree) = predict_traced(&program, &query, &cfg)?;
    if let Some(path) = &args.trace {
        write_trace(path, &tree, &program)?;
    }
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.to_json())?),
    }
    Ok(if report.verdict == Verdict::ResourceExceeded { EXIT_RESOURCES } else { 0 })
}

fn write_trace(path: &Path, tree: &termpred::GeneralizedTree, program: &Program) -> Result<()> {
    let body = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(&tree_to_json(tree, program))?
    } else {
        tree_to_dot(tree, program)
    };
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn all_modes(program: &Program, cfg: &PredictorConfig, format: Format) -> Result<u8> {
    let results = analyze_all_modes(program, cfg);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&results)?),
        Format::Text => {
            let width = results.iter().map(|r| r.query.len()).max().unwrap_or(5).max(5);
            println!("{:<width$}  verdict", "query");
            for r in &results {
                let cell = match &r.result {
                    ModeVerdict::Computed { verdict } => verdict.to_string(),
                    ModeVerdict::Inferred { verdict, from } => format!("{verdict} (inferred from {from})"),
                    ModeVerdict::Failed { error } => format!("error: {error}"),
                    ModeVerdict::Unassigned => "unassigned".to_string(),
                };
                println!("{:<width$}  {cell}", r.query);
            }
        }
    }
    let failed = results.iter().any(|r| matches!(r.result, ModeVerdict::Failed { .. }));
    let exceeded = results.iter().any(|r| r.result.verdict() == Some(Verdict::ResourceExceeded));
    Ok(if failed {
        EXIT_ERROR
    } else if exceeded {
        EXIT_RESOURCES
    } else {
        0
    })
}
