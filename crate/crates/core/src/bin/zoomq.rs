//! Command-line front end: `run`, `compare` and `dims`.
//!
//! Exit status is 0 on success, 2 on a usage error, 3 when a partition or
//! count invariant was violated, and 1 for any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zooming_q::agent::{AgentKind, SplitCheck, TieBreak};
use zooming_q::harness::{self, DimsConfig, ExperimentConfig};
use zooming_q::Error;

#[derive(Parser)]
#[command(name = "zoomq", version, about = "Adaptive Q-learning experiments over metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded episodes and write logs, trees, summaries and regret tables.
    Run(RunArgs),
    /// Compare two experiment directories on the same environment and K.
    Compare(CompareArgs),
    /// Tabulate zooming and covering profiles of an environment.
    Dims(DimsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long, value_parser = parse_agent)]
    agent: Option<AgentKind>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Oracle grid spacing.
    #[arg(long)]
    grid: Option<f64>,
    /// Ball radius of the uniform baseline.
    #[arg(long)]
    eps: Option<f64>,
    /// One seed or a comma-separated list.
    #[arg(long = "seed", alias = "seeds", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long, value_parser = parse_check)]
    check: Option<SplitCheck>,
    #[arg(long, value_parser = parse_tie_break)]
    tie_break: Option<TieBreak>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the SVG regret plot.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DimsArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    /// Finest scale index `I`: scales are `d_max 2^-i` for `i = 0..=I`.
    #[arg(long)]
    scales: Option<u32>,
    #[arg(long)]
    grid: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_agent(s: &str) -> Result<AgentKind, String> {
    match s {
        "adaptive" => Ok(AgentKind::Adaptive),
        "uniform" => Ok(AgentKind::Uniform),
        _ => Err(format!("expected `adaptive` or `uniform`, got `{s}`")),
    }
}

fn parse_check(s: &str) -> Result<SplitCheck, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("expected `off`, `incremental` or `full`, got `{s}`"))
}

fn parse_tie_break(s: &str) -> Result<TieBreak, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn experiment_config(args: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path).map_err(as_usage("config"))?,
        None => ExperimentConfig::default(),
    };
    if args.env.is_some() {
        cfg.env = args.env;
    }
    if let Some(v) = args.agent {
        cfg.agent = v;
    }
    if let Some(v) = args.episodes {
        cfg.episodes = v;
    }
    if args.horizon.is_some() {
        cfg.horizon = args.horizon;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if args.lipschitz.is_some() {
        cfg.lipschitz = args.lipschitz;
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if args.eps.is_some() {
        cfg.eps = args.eps;
    }
    if let Some(v) = args.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = args.max_depth {
        cfg.max_depth = v;
    }
    if let Some(v) = args.check {
        cfg.check = v;
    }
    if let Some(v) = args.tie_break {
        cfg.tie_break = v;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.no_svg {
        cfg.svg = false;
    }
    Ok(cfg)
}

fn dims_config(args: DimsArgs) -> Result<DimsConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => DimsConfig::from_json_file(path).map_err(as_usage("config"))?,
        None => DimsConfig::default(),
    };
    if args.env.is_some() {
        cfg.env = args.env;
    }
    if let Some(v) = args.scales {
        cfg.scales = v;
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if args.horizon.is_some() {
        cfg.horizon = args.horizon;
    }
    if args.lipschitz.is_some() {
        cfg.lipschitz = args.lipschitz;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    Ok(cfg)
}

fn as_usage(field: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Usage {
        field: field.to_string(),
        message: e.to_string(),
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let cfg = experiment_config(args)?;
            let report = harness::run_experiment(&cfg)?;
            for s in &report.summaries {
                let slope = s.regret_slope.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope));
                println!(
                    "seed {}: regret {:.2}, slope {slope}, bound {:.3e}, optimism violations {}",
                    s.seed, s.regret, s.theorem_bound.value, s.optimism.violations
                );
            }
            println!("artifacts in {}", report.out.display());
        }
        Command::Compare(args) => {
            let c = harness::compare(&args.a, &args.b, &args.out)?;
            let fmt = |f: &Option<zooming_q::diagnostics::SlopeFit>| f.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope));
            println!(
                "{} K={}: a slope {}, b slope {}, median regret {:.2} vs {:.2}",
                c.env,
                c.episodes,
                fmt(&c.a.slope),
                fmt(&c.b.slope),
                c.a.median_regret,
                c.b.median_regret
            );
        }
        Command::Dims(args) => {
            let cfg = dims_config(args)?;
            let report = harness::dims(&cfg)?;
            let fmt = |f: &Option<zooming_q::diagnostics::SlopeFit>| f.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope));
            println!("{}: covering slope {}", report.env, fmt(&report.covering_fit));
            for s in &report.stages {
                println!(
                    "stage {}: zooming slope {} (informative scales {:?}: {})",
                    s.stage,
                    fmt(&s.zooming_fit),
                    s.informative,
                    fmt(&s.zooming_fit_informative)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage { .. } => 2,
                Error::InvariantViolation(_) => 3,
                _ => 1,
            })
        }
    }
}
