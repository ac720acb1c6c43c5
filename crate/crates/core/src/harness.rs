//! Seeded experiment runs with on-disk artifacts.
//!
//! [`run_experiment`] writes, per seed, a directory `seed-<S>/` holding
//!
//! - `episodes.jsonl`: one [`EpisodeLog`] per line,
//! - `tree.json`: the final partition of every stage,
//! - `summary.json`: a [`SeedSummary`] of regret and diagnostic checks,
//! - `regret.csv`: one row per episode,
//! - `regret.svg`: the cumulative regret curve (unless disabled).
//!
//! [`compare`] joins two such experiments and [`dims`] tabulates zooming and
//! covering profiles of an environment.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{
    build_uniform, Agent, AgentConfig, AgentKind, Ball, EpisodeLog, PartitionReport, SplitCheck, TieBreak,
    UniformPartition, WitnessGrid, DEFAULT_MAX_DEPTH,
};
use crate::diagnostics::{
    check_counts, check_optimism, check_partition, clipped_surplus_ledger, covering_profile, dimension_fit,
    dyadic_scales, fine_ball_alignment, near_optimal_constant, profile_points, regret, regret_slope,
    theorem_bound, zooming_profile, CountReport, OptimismReport, RegretReport, ScaleCount, SlopeFit, TheoremBound,
};
use crate::env::{Environment, OracleTables};
use crate::error::{Error, Result};
use crate::metric::DEFAULT_EXACT_THRESHOLD;

/// Default confidence parameter.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Default oracle grid spacing.
pub const DEFAULT_ORACLE_GRID: f64 = 1.0 / 256.0;

/// Settings of one experiment. Every field has a CLI flag of the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Benchmark name, see [`crate::env::SHIPPED`].
    pub env: Option<String>,
    pub agent: AgentKind,
    /// Number of episodes `K`.
    pub episodes: usize,
    /// Horizon override; the benchmark default otherwise.
    pub horizon: Option<usize>,
    pub delta: f64,
    /// Lipschitz constant override; the benchmark hint otherwise.
    pub lipschitz: Option<f64>,
    /// Oracle grid spacing used for regret and diagnostics.
    pub grid: f64,
    /// Ball radius of the uniform baseline, `d_max / 2^i`. When absent the
    /// dyadic radius closest to `d_max K^(-1/(d+2))` is used, `d` being the
    /// joint dimension.
    pub eps: Option<f64>,
    pub seeds: Vec<u64>,
    pub max_depth: u32,
    pub check: SplitCheck,
    pub tie_break: TieBreak,
    pub out: Option<PathBuf>,
    /// Whether to draw `regret.svg`.
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: None,
            agent: AgentKind::Adaptive,
            episodes: 1000,
            horizon: None,
            delta: DEFAULT_DELTA,
            lipschitz: None,
            grid: DEFAULT_ORACLE_GRID,
            eps: None,
            seeds: vec![1],
            max_depth: DEFAULT_MAX_DEPTH,
            check: SplitCheck::default(),
            tie_break: TieBreak::default(),
            out: None,
            svg: true,
        }
    }
}

impl ExperimentConfig {
    pub fn new(env: &str, agent: AgentKind, episodes: usize) -> Self {
        ExperimentConfig {
            env: Some(env.to_string()),
            agent,
            episodes,
            ..Default::default()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// Range checks. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        match &self.env {
            None => return Err(Error::usage("env", "an environment name is required")),
            Some(name) if name.trim().is_empty() => return Err(Error::usage("env", "must not be empty")),
            Some(_) => {}
        }
        if self.episodes == 0 {
            return Err(Error::usage("episodes", "must be at least 1"));
        }
        if self.horizon == Some(0) {
            return Err(Error::usage("horizon", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::usage("delta", format!("{} is outside (0, 1)", self.delta)));
        }
        if let Some(l) = self.lipschitz {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::usage("lipschitz", "must be a finite non-negative number"));
            }
        }
        if !(self.grid > 0.0 && self.grid <= 0.5) {
            return Err(Error::usage("grid", format!("{} is outside (0, 0.5]", self.grid)));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::usage("eps", "must be positive"));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::usage("seeds", "at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::usage("seeds", "seeds must be distinct"));
        }
        if self.max_depth > 30 {
            return Err(Error::usage("max_depth", "must be at most 30"));
        }
        Ok(())
    }

    fn env_name(&self) -> &str {
        self.env.as_deref().unwrap_or_default()
    }
}

/// Dyadic radius `d_max / 2^i`, `i >= 1`, closest in log scale to
/// `d_max K^(-1/(d+2))`.
pub fn default_uniform_eps(d_max: f64, joint_dim: usize, episodes: usize) -> f64 {
    let target = (episodes as f64).powf(-1.0 / (joint_dim as f64 + 2.0));
    let i = (-target.log2()).round().max(1.0);
    d_max / f64::powi(2.0, i as i32)
}

/// A validated experiment, ready to run seeds.
#[derive(Debug, Clone)]
pub struct Runner {
    pub config: ExperimentConfig,
    /// The fixed net, for uniform experiments.
    pub partition: Option<UniformPartition>,
}

/// One seed's learner and logs.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub env: Environment,
    pub agent: Agent,
    pub logs: Vec<EpisodeLog>,
}

impl Runner {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let env = Environment::by_name(config.env_name(), config.horizon, 0)?;
        let partition = match config.agent {
            AgentKind::Adaptive => None,
            AgentKind::Uniform => {
                let d_max = env.d_max();
                let eps = config
                    .eps
                    .unwrap_or_else(|| default_uniform_eps(d_max, env.state_dim + env.action_dim, config.episodes));
                let depth = (d_max / eps).log2().round().max(0.0) as u32;
                let grid = WitnessGrid::for_depth(env.metric, env.state_dim, env.action_dim, depth)?;
                Some(build_uniform(eps, grid.into())?)
            }
        };
        Ok(Runner { config, partition })
    }

    /// The environment with initial states drawn from `seed`.
    pub fn environment(&self, seed: u64) -> Result<Environment> {
        Environment::by_name(self.config.env_name(), self.config.horizon, seed)
    }

    /// Learner parameters for `env`.
    pub fn agent_config(&self, env: &Environment) -> AgentConfig {
        let mut cfg = AgentConfig::for_env(env, self.config.episodes, self.config.delta);
        if let Some(l) = self.config.lipschitz {
            cfg.lipschitz = l;
        }
        cfg.max_depth = self.config.max_depth;
        cfg.check = self.config.check;
        cfg.tie_break = self.config.tie_break;
        cfg
    }

    /// Run all episodes for one seed. The seed fixes both the initial-state
    /// script and the transition noise stream.
    pub fn run_seed(&self, seed: u64) -> Result<SeedRun> {
        let env = self.environment(seed)?;
        let cfg = self.agent_config(&env);
        let mut agent = match &self.partition {
            None => Agent::adaptive(cfg, &env)?,
            Some(p) => Agent::uniform(cfg, &env, p)?,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let logs = agent.run(&env, &mut rng)?;
        Ok(SeedRun { seed, env, agent, logs })
    }

    /// Oracle tables at the configured grid.
    pub fn oracle(&self) -> Result<OracleTables> {
        OracleTables::build(&self.environment(0)?, self.config.grid)
    }
}

/// Scales `d_max 2^-i` for `i = 0..=I`, with `I` the finest level the oracle
/// grid resolves.
pub fn oracle_scales(oracle: &OracleTables) -> Vec<f64> {
    let d_max = oracle.metric.d_max;
    let finest = (d_max / oracle.eps_grid).log2().floor().max(0.0) as u32;
    dyadic_scales(d_max, 0, finest)
}

/// Zooming profiles of every stage over [`oracle_scales`].
pub fn stage_profiles(oracle: &OracleTables, lipschitz: f64) -> Result<Vec<Vec<ScaleCount>>> {
    let scales = oracle_scales(oracle);
    (1..=oracle.horizon)
        .map(|h| zooming_profile(oracle, h, &scales, lipschitz, DEFAULT_EXACT_THRESHOLD))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusSummary {
    pub total: f64,
    pub unclipped_total: f64,
    pub unit_total: f64,
    pub grid_slack: f64,
    pub large_gap_balls: usize,
    pub unclipped_large_gap_balls: usize,
}

/// Per-seed results written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub env: String,
    pub agent: AgentKind,
    pub seed: u64,
    pub episodes: usize,
    pub horizon: usize,
    pub delta: f64,
    pub lipschitz: f64,
    pub iota: f64,
    pub eps: Option<f64>,
    pub eps_grid: f64,
    pub total_reward: f64,
    pub regret: f64,
    pub regret_slope: Option<SlopeFit>,
    pub partition: Vec<PartitionReport>,
    pub counts: CountReport,
    pub optimism: OptimismReport,
    pub surplus: SurplusSummary,
    pub theorem_bound: TheoremBound,
    /// Fine balls whose centers lie in the near-optimal set at their scale,
    /// as `(inside, total)`.
    pub alignment: (usize, usize),
    /// Per stage, `(all, active)` balls at each depth.
    pub depth_histogram: Vec<Vec<(usize, usize)>>,
    /// Active balls per radius over all stages, finest last.
    pub radius_histogram: Vec<(f64, usize)>,
}

impl SeedSummary {
    /// Partition and count audits both clean.
    pub fn invariants_ok(&self) -> bool {
        self.partition.iter().all(PartitionReport::ok) && self.counts.ok()
    }
}

/// Evaluate a finished seed against the oracle.
pub fn summarize(
    run: &SeedRun,
    oracle: &OracleTables,
    profiles: &[Vec<ScaleCount>],
    eps: Option<f64>,
) -> Result<(SeedSummary, RegretReport)> {
    let cfg = &run.agent.config;
    let report = regret(&run.logs, oracle)?;
    let trees = run.agent.trees();
    let ledger = clipped_surplus_ledger(&run.logs, oracle, cfg);
    let mut radii: Vec<(f64, usize)> = Vec::new();
    for tree in trees {
        for (depth, &(_, active)) in tree.depth_histogram().iter().enumerate() {
            if active == 0 {
                continue;
            }
            let r = tree.radius_at(depth as u32);
            match radii.iter_mut().find(|(q, _)| *q == r) {
                Some(slot) => slot.1 += active,
                None => radii.push((r, active)),
            }
        }
    }
    radii.sort_by(|a, b| b.0.total_cmp(&a.0));
    let summary = SeedSummary {
        env: run.env.name.clone(),
        agent: run.agent.kind,
        seed: run.seed,
        episodes: cfg.episodes,
        horizon: cfg.horizon,
        delta: cfg.delta,
        lipschitz: cfg.lipschitz,
        iota: cfg.iota(),
        eps,
        eps_grid: oracle.eps_grid,
        total_reward: run.logs.iter().map(|l| l.total_reward).sum(),
        regret: report.total,
        regret_slope: report.slope,
        partition: check_partition(trees),
        counts: check_counts(trees),
        optimism: check_optimism(&run.logs, oracle, oracle.eps_grid * cfg.lipschitz),
        surplus: SurplusSummary {
            total: ledger.total,
            unclipped_total: ledger.unclipped_total,
            unit_total: ledger.unit_total,
            grid_slack: ledger.grid_slack,
            large_gap_balls: ledger.balls.iter().filter(|b| b.large_gap).count(),
            unclipped_large_gap_balls: ledger.unclipped_large_gap_balls().len(),
        },
        theorem_bound: theorem_bound(profiles, cfg)?,
        alignment: fine_ball_alignment(trees, oracle, cfg.lipschitz)?,
        depth_histogram: trees.iter().map(|t| t.depth_histogram()).collect(),
        radius_histogram: radii,
    };
    Ok((summary, report))
}

#[derive(Serialize)]
struct TreeDump<'a> {
    env: &'a str,
    agent: AgentKind,
    seed: u64,
    stages: Vec<StageDump<'a>>,
}

#[derive(Serialize)]
struct StageDump<'a> {
    stage: usize,
    balls: &'a [Ball],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub episode: usize,
    pub v_star: f64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub regret: f64,
    pub cumulative: f64,
}

/// Write `episodes.jsonl`, one episode per line.
pub fn write_episode_log(path: impl AsRef<Path>, logs: &[EpisodeLog]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for log in logs {
        serde_json::to_writer(&mut out, log)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read back an `episodes.jsonl` file.
pub fn read_episode_log(path: impl AsRef<Path>) -> Result<Vec<EpisodeLog>> {
    let reader = BufReader::new(File::open(path)?);
    let mut logs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            logs.push(serde_json::from_str(&line)?);
        }
    }
    Ok(logs)
}

pub fn write_regret_csv(path: impl AsRef<Path>, report: &RegretReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for k in 0..report.episodes {
        w.serialize(RegretRow {
            episode: k + 1,
            v_star: report.v_star[k],
            ret: report.returns[k],
            regret: report.v_star[k] - report.returns[k],
            cumulative: report.cumulative[k],
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_regret_csv(path: impl AsRef<Path>) -> Result<Vec<RegretRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Directory of one seed's artifacts.
pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub out: PathBuf,
    pub summaries: Vec<SeedSummary>,
}

/// Run every seed of `config` and write its artifacts under `config.out`.
///
/// Artifacts are written before invariants are judged, so a failing run
/// still leaves its evidence on disk. A failed partition or count audit is
/// then reported as an invariant violation.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::usage("out", "an output directory is required"))?;
    let runner = Runner::new(config.clone())?;
    let oracle = runner.oracle()?;
    let lipschitz = runner.agent_config(&runner.environment(0)?).lipschitz;
    let profiles = stage_profiles(&oracle, lipschitz)?;
    fs::create_dir_all(&out)?;
    write_json(out.join("config.json"), config)?;
    if let Some(p) = &runner.partition {
        write_json(out.join("uniform-partition.json"), p)?;
    }
    let eps = runner.partition.as_ref().map(|p| p.eps);

    let summaries = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let run = runner.run_seed(seed)?;
            let (summary, report) = summarize(&run, &oracle, &profiles, eps)?;
            let dir = seed_dir(&out, seed);
            fs::create_dir_all(&dir)?;
            write_episode_log(dir.join("episodes.jsonl"), &run.logs)?;
            let stages = run
                .agent
                .trees()
                .iter()
                .map(|t| StageDump {
                    stage: t.stage,
                    balls: t.balls(),
                })
                .collect();
            write_json(
                dir.join("tree.json"),
                &TreeDump {
                    env: &summary.env,
                    agent: summary.agent,
                    seed,
                    stages,
                },
            )?;
            write_json(dir.join("summary.json"), &summary)?;
            write_regret_csv(dir.join("regret.csv"), &report)?;
            if config.svg {
                let title = format!("{} {:?} seed {seed}", summary.env, summary.agent).to_lowercase();
                write_svg(dir.join("regret.svg"), &title, &[("cumulative regret", &report.cumulative)])?;
            }
            Ok(summary)
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(bad) = summaries.iter().find(|s| !s.invariants_ok()) {
        let uncovered: usize = bad.partition.iter().map(|p| p.uncovered).sum();
        let separation: usize = bad.partition.iter().map(|p| p.separation.len()).sum();
        return Err(Error::invariant(format!(
            "seed {}: {uncovered} uncovered grid points, {separation} separation faults, {} count violations",
            bad.seed,
            bad.counts.violations.len()
        )));
    }
    Ok(ExperimentReport { out, summaries })
}

/// Per-episode median over seeds.
fn median_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|k| {
            let mut col: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            median(&mut col)
        })
        .collect()
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One side of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub dir: PathBuf,
    pub agent: AgentKind,
    pub eps: Option<f64>,
    pub seeds: Vec<u64>,
    /// Final regret of the median curve.
    pub median_regret: f64,
    /// Slope fit of the median cumulative regret curve.
    pub slope: Option<SlopeFit>,
    pub seed_slopes: Vec<Option<f64>>,
    pub radius_histogram: Vec<(f64, usize)>,
    pub alignment: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub env: String,
    pub episodes: usize,
    pub a: ArmSummary,
    pub b: ArmSummary,
    /// `slope(a) - slope(b)` when both fits exist.
    pub slope_difference: Option<f64>,
    /// Largest `|median_a - median_b|` over episodes.
    pub max_regret_difference: f64,
}

struct Arm {
    config: ExperimentConfig,
    summary: ArmSummary,
    median: Vec<f64>,
}

fn load_arm(dir: &Path) -> Result<Arm> {
    let config: ExperimentConfig = read_json(dir.join("config.json"))?;
    let mut curves = Vec::new();
    let mut seed_slopes = Vec::new();
    let mut radii: Vec<(f64, usize)> = Vec::new();
    let mut alignment = (0, 0);
    let mut eps = None;
    for &seed in &config.seeds {
        let sd = seed_dir(dir, seed);
        let rows = read_regret_csv(sd.join("regret.csv"))?;
        if rows.len() != config.episodes {
            return Err(Error::invalid(format!(
                "{} has {} rows, expected {}",
                sd.join("regret.csv").display(),
                rows.len(),
                config.episodes
            )));
        }
        let summary: SeedSummary = read_json(sd.join("summary.json"))?;
        seed_slopes.push(summary.regret_slope.map(|f| f.slope));
        for &(r, n) in &summary.radius_histogram {
            match radii.iter_mut().find(|(q, _)| *q == r) {
                Some(slot) => slot.1 += n,
                None => radii.push((r, n)),
            }
        }
        alignment.0 += summary.alignment.0;
        alignment.1 += summary.alignment.1;
        eps = summary.eps;
        curves.push(rows.iter().map(|r| r.cumulative).collect::<Vec<_>>());
    }
    radii.sort_by(|a, b| b.0.total_cmp(&a.0));
    let median = median_curve(&curves);
    let summary = ArmSummary {
        dir: dir.to_path_buf(),
        agent: config.agent,
        eps,
        seeds: config.seeds.clone(),
        median_regret: median.last().copied().unwrap_or(0.0),
        slope: regret_slope(&median),
        seed_slopes,
        radius_histogram: radii,
        alignment,
    };
    Ok(Arm { config, summary, median })
}

/// Join two experiments on the same environment and episode count.
///
/// Writes `comparison.csv` (median cumulative regret per episode of both
/// sides and their difference), `comparison.json` and `comparison.svg`.
pub fn compare(a: &Path, b: &Path, out: &Path) -> Result<Comparison> {
    let arm_a = load_arm(a)?;
    let arm_b = load_arm(b)?;
    if arm_a.config.env != arm_b.config.env {
        return Err(Error::invalid(format!(
            "environments differ: {:?} vs {:?}",
            arm_a.config.env, arm_b.config.env
        )));
    }
    if arm_a.config.episodes != arm_b.config.episodes {
        return Err(Error::invalid(format!(
            "episode counts differ: {} vs {}",
            arm_a.config.episodes, arm_b.config.episodes
        )));
    }
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("comparison.csv"))?;
    w.write_record(["episode", "a_cumulative", "b_cumulative", "difference"])?;
    let mut max_diff: f64 = 0.0;
    for (k, (x, y)) in arm_a.median.iter().zip(&arm_b.median).enumerate() {
        max_diff = max_diff.max((x - y).abs());
        w.serialize((k + 1, x, y, x - y))?;
    }
    w.flush()?;
    let slope_difference = match (&arm_a.summary.slope, &arm_b.summary.slope) {
        (Some(x), Some(y)) => Some(x.slope - y.slope),
        _ => None,
    };
    let label = |arm: &Arm| match arm.summary.eps {
        Some(eps) => format!("uniform eps={eps}"),
        None => "adaptive".to_string(),
    };
    let (label_a, label_b) = (format!("a: {}", label(&arm_a)), format!("b: {}", label(&arm_b)));
    let env = arm_a.config.env.clone().unwrap_or_default();
    write_svg(
        out.join("comparison.svg"),
        &format!("{env}, median cumulative regret"),
        &[(label_a.as_str(), &arm_a.median), (label_b.as_str(), &arm_b.median)],
    )?;
    let comparison = Comparison {
        env,
        episodes: arm_a.config.episodes,
        a: arm_a.summary,
        b: arm_b.summary,
        slope_difference,
        max_regret_difference: max_diff,
    };
    write_json(out.join("comparison.json"), &comparison)?;
    Ok(comparison)
}

/// Settings of a dimension report. Every field has a CLI flag of the same
/// name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimsConfig {
    pub env: Option<String>,
    /// Finest scale index: scales run over `d_max 2^-i`, `i = 0..=scales`.
    pub scales: u32,
    pub grid: f64,
    pub horizon: Option<usize>,
    pub lipschitz: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Default for DimsConfig {
    fn default() -> Self {
        DimsConfig {
            env: None,
            scales: 8,
            grid: DEFAULT_ORACLE_GRID,
            horizon: None,
            lipschitz: None,
            out: None,
        }
    }
}

impl DimsConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.env {
            None => return Err(Error::usage("env", "an environment name is required")),
            Some(name) if name.trim().is_empty() => return Err(Error::usage("env", "must not be empty")),
            Some(_) => {}
        }
        if !(self.grid > 0.0 && self.grid <= 0.5) {
            return Err(Error::usage("grid", format!("{} is outside (0, 0.5]", self.grid)));
        }
        if self.scales < 2 {
            return Err(Error::usage("scales", "at least three scales (i = 0..=2) are needed for a fit"));
        }
        if self.scales > 30 {
            return Err(Error::usage("scales", "must be at most 30"));
        }
        if let Some(l) = self.lipschitz {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::usage("lipschitz", "must be a finite non-negative number"));
            }
        }
        if self.horizon == Some(0) {
            return Err(Error::usage("horizon", "must be at least 1"));
        }
        Ok(())
    }
}

/// Zooming and covering profiles of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDims {
    pub stage: usize,
    pub max_gap: f64,
    /// Indices into the scale list where `c1 r < max_gap`, i.e. where the
    /// near-optimal set is a proper subset of the space.
    pub informative: Vec<usize>,
    pub zooming: Vec<ScaleCount>,
    pub zooming_fit: Option<SlopeFit>,
    pub zooming_fit_informative: Option<SlopeFit>,
    pub covering_fit_informative: Option<SlopeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimsReport {
    pub env: String,
    pub eps_grid: f64,
    pub lipschitz: f64,
    /// Near-optimal threshold constant `2(H+1)/d_max + 2L`.
    pub c1: f64,
    pub scales: Vec<f64>,
    pub covering: Vec<ScaleCount>,
    pub covering_fit: Option<SlopeFit>,
    pub stages: Vec<StageDims>,
}

/// Largest oracle gap at stage `h`.
pub fn max_gap(oracle: &OracleTables, h: usize) -> f64 {
    let mut m: f64 = 0.0;
    for s in 0..oracle.n_states() {
        for a in 0..oracle.n_actions() {
            m = m.max(oracle.gap_at(h, s, a));
        }
    }
    m
}

fn fit_subset(profile: &[ScaleCount], idx: &[usize]) -> Option<SlopeFit> {
    let chosen: Vec<ScaleCount> = idx.iter().map(|&i| profile[i]).collect();
    dimension_fit(&profile_points(&chosen)).ok()
}

/// Zooming profiles per stage and the covering profile at the given scales.
pub fn dimension_report(env: &Environment, oracle: &OracleTables, scales: &[f64], lipschitz: f64) -> Result<DimsReport> {
    let c1 = near_optimal_constant(oracle.horizon, oracle.metric.d_max, lipschitz);
    let covering = covering_profile(oracle, scales, DEFAULT_EXACT_THRESHOLD)?;
    let stages = (1..=oracle.horizon)
        .map(|h| {
            let zooming = zooming_profile(oracle, h, scales, lipschitz, DEFAULT_EXACT_THRESHOLD)?;
            let gap = max_gap(oracle, h);
            let informative: Vec<usize> = (0..scales.len()).filter(|&i| c1 * scales[i] < gap).collect();
            Ok(StageDims {
                stage: h,
                max_gap: gap,
                zooming_fit: dimension_fit(&profile_points(&zooming)).ok(),
                zooming_fit_informative: fit_subset(&zooming, &informative),
                covering_fit_informative: fit_subset(&covering, &informative),
                informative,
                zooming,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DimsReport {
        env: env.name.clone(),
        eps_grid: oracle.eps_grid,
        lipschitz,
        c1,
        scales: scales.to_vec(),
        covering_fit: dimension_fit(&profile_points(&covering)).ok(),
        covering,
        stages,
    })
}

/// Write `dims.csv` and `dims.json` for `config.env`.
pub fn dims(config: &DimsConfig) -> Result<DimsReport> {
    config.validate()?;
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::usage("out", "an output directory is required"))?;
    let env = Environment::by_name(config.env.as_deref().unwrap_or_default(), config.horizon, 0)?;
    let d_max = env.d_max();
    if d_max / f64::powi(2.0, config.scales as i32) < config.grid * (1.0 - 1e-9) {
        return Err(Error::usage(
            "scales",
            format!(
                "the finest scale d_max/2^{} is below the oracle grid spacing {}",
                config.scales, config.grid
            ),
        ));
    }
    let oracle = OracleTables::build(&env, config.grid)?;
    let lipschitz = config.lipschitz.unwrap_or(env.lipschitz_hint);
    let scales = dyadic_scales(d_max, 0, config.scales);
    let report = dimension_report(&env, &oracle, &scales, lipschitz)?;
    fs::create_dir_all(&out)?;
    let mut w = csv::Writer::from_path(out.join("dims.csv"))?;
    w.write_record([
        "stage",
        "i",
        "r",
        "region",
        "zooming",
        "zooming_upper",
        "zooming_exact",
        "covering",
        "covering_upper",
    ])?;
    for stage in &report.stages {
        for (i, (z, c)) in stage.zooming.iter().zip(&report.covering).enumerate() {
            w.serialize((
                stage.stage,
                i,
                z.r,
                z.region,
                z.packing.count,
                z.packing.upper,
                z.packing.exact,
                c.packing.count,
                c.packing.upper,
            ))?;
        }
    }
    w.flush()?;
    write_json(out.join("dims.json"), &report)?;
    Ok(report)
}

const SVG_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot of one or more series against episode index.
pub fn write_svg(path: impl AsRef<Path>, title: &str, series: &[(&str, &[f64])]) -> Result<()> {
    let (width, height) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let (pw, ph) = (width - left - right, height - top - bottom);
    let n = series.iter().map(|(_, s)| s.len()).max().unwrap_or(0).max(1);
    let y_max = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let y_min = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::min);
    let span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let x_of = |k: usize| left + pw * k as f64 / n as f64;
    let y_of = |v: f64| top + ph * (1.0 - (v - y_min) / span);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        escape(title)
    ));
    svg.push_str(&format!(
        "<path d=\"M{left} {top} V{} H{}\" stroke=\"black\" fill=\"none\"/>\n",
        top + ph,
        left + pw
    ));
    for (text, x, y, anchor) in [
        (format!("{y_max:.1}"), left - 6.0, top + 4.0, "end"),
        (format!("{y_min:.1}"), left - 6.0, top + ph + 4.0, "end"),
        ("0".to_string(), left, top + ph + 18.0, "middle"),
        (format!("{n}"), left + pw, top + ph + 18.0, "middle"),
        ("episode".to_string(), left + pw / 2.0, height - 12.0, "middle"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"{anchor}\">{text}</text>\n"
        ));
    }
    for (i, (label, values)) in series.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let stride = values.len().div_ceil(800).max(1);
        let mut points = String::new();
        for (k, v) in values.iter().enumerate() {
            if (k % stride == 0 || k + 1 == values.len()) && v.is_finite() {
                points.push_str(&format!("{:.2},{:.2} ", x_of(k + 1), y_of(*v)));
            }
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\" fill=\"none\"/>\n",
            points.trim_end()
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            left + 10.0,
            top + 16.0 * (i as f64 + 1.0),
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
