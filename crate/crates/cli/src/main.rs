//! `cusptree`: build cusped and coned spaces, measure hyperbolicity and
//! quasi-isometry constants, and compute cut-point/cut-pair trees.
//!
//! Exit status: 0 on success, 1 when a requested bound check fails, 2 on
//! usage, input or domain errors.

mod commands;
mod run;
mod space;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cusptree", version, about = "Cusped spaces, quasi-isometry constants and boundary trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a cusped or coned space over a Cayley ball.
    Build(BuildArgs),
    /// Four-point hyperbolicity constant of a graph or space file.
    Delta(DeltaArgs),
    /// Combined cut-point/cut-pair tree of a connected graph.
    Tree(TreeArgs),
    /// Measure a vertex map between two spaces and optionally check a bound.
    Qi(QiArgs),
    /// Sphere graph about a basepoint and the trees of its components.
    Sphere(SphereArgs),
    /// Four-point δ across a family of spaces, as CSV.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpaceKind {
    Cusped,
    Coned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
pub struct BuildArgs {
    #[arg(value_enum)]
    kind: SpaceKind,
    /// Group specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Cayley ball radius.
    #[arg(long)]
    radius: u32,
    /// Horoball depth (cusped only); defaults to ⌈log₂ of the largest piece diameter⌉ + 2.
    #[arg(long)]
    depth: Option<u32>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    /// Seed for sampled mode (required there).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled quadruples.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Args)]
pub struct DeltaArgs {
    /// Graph or space file.
    #[arg(long)]
    space: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
pub struct TreeArgs {
    /// Graph file (any JSON object with `n` and `edges`).
    #[arg(long)]
    graph: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
pub struct QiArgs {
    /// Map file: `{"map": [...], "correspondence": [[i, j], ...]}`.
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Multiplicative constant, e.g. `3/2`; by default the best of 1, 3/2, 2, 3, 4.
    #[arg(long)]
    k: Option<String>,
    /// Λ for the `3Λ·d + Λ` check; cusped extensions default to the measured Λ.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
pub struct SphereArgs {
    #[arg(long)]
    space: PathBuf,
    /// Sphere radius R.
    #[arg(long)]
    radius: u32,
    /// Threshold s; defaults to 2δ of the space.
    #[arg(long)]
    threshold: Option<u32>,
    /// Basepoint vertex.
    #[arg(long, default_value_t = 0)]
    base: usize,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Recipe {
    HoroballCycle,
    HoroballPath,
    FreeAbelian,
    Free,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    recipe: Recipe,
    /// Comma-separated parameters (cycle/path length or ball radius).
    #[arg(long, value_delimiter = ',', required = true)]
    params: Vec<u32>,
    /// Group rank for ball recipes.
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Horoball depth; defaults to ⌈log₂ param⌉.
    #[arg(long)]
    depth: Option<u32>,
    #[command(flatten)]
    mode: ModeArgs,
    /// CSV output; the run config goes to `<output>.run.json`.
    #[arg(short, long)]
    output: PathBuf,
}

/// Result of a command that ran to completion.
pub enum Outcome {
    Ok,
    CheckFailed(String),
}

fn configure_threads() {
    if let Some(n) = std::env::var("CUSPTREE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not set thread count: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Build(a) => commands::build(a),
        Command::Delta(a) => commands::delta(a),
        Command::Tree(a) => commands::tree(a),
        Command::Qi(a) => commands::qi(a),
        Command::Sphere(a) => commands::sphere(a),
        Command::Scan(a) => commands::scan(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
