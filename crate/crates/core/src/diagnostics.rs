//! Quantities from the regret analysis, evaluated on finished runs.
//!
//! Everything here is a pure function of run artifacts (episode logs, final
//! trees) and oracle tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{bonus, learning_rate, AgentConfig, EpisodeLog, PartitionReport, PartitionTree};
use crate::env::OracleTables;
use crate::error::{Error, Result};
use crate::metric::{packing_number, Packing, PointCloud};

/// `alpha_t^i = alpha_i prod_{j=i+1}^t (1 - alpha_j)`, for `1 <= i <= t`.
pub fn alpha_weight(t: u64, i: u64, horizon: usize) -> f64 {
    assert!(1 <= i && i <= t, "alpha_weight needs 1 <= i <= t (got i = {i}, t = {t})");
    (i + 1..=t).fold(learning_rate(i, horizon), |w, j| w * (1.0 - learning_rate(j, horizon)))
}

/// `sum_{t=i}^{last} alpha_t^i`, accumulated in one pass.
pub fn alpha_weight_sum(i: u64, last: u64, horizon: usize) -> f64 {
    let mut w = learning_rate(i, horizon);
    let mut sum = w;
    for t in i + 1..=last {
        w *= 1.0 - learning_rate(t, horizon);
        sum += w;
    }
    sum
}

/// `beta_t = 2 sum_{i=1}^t alpha_t^i b_i`, summed term by term.
pub fn beta(t: u64, config: &AgentConfig) -> f64 {
    assert!(t >= 1, "beta needs t >= 1");
    // Walk i downwards so that each weight reuses the previous product.
    let mut tail = 1.0;
    let mut sum = 0.0;
    for i in (1..=t).rev() {
        sum += learning_rate(i, config.horizon) * tail * bonus(i, config);
        tail *= 1.0 - learning_rate(i, config.horizon);
    }
    2.0 * sum
}

/// `beta_0 = 0, ..., beta_last` via `beta_t = (1 - alpha_t) beta_{t-1} + 2 alpha_t b_t`.
pub fn beta_sequence(last: u64, config: &AgentConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(last as usize + 1);
    out.push(0.0);
    let mut b = 0.0;
    for t in 1..=last {
        let a = learning_rate(t, config.horizon);
        b = (1.0 - a) * b + 2.0 * a * bonus(t, config);
        out.push(b);
    }
    out
}

/// Closed-form envelope `8 sqrt(H^3 iota / t) + 16 L d_max / sqrt(t)`.
pub fn beta_bound(t: u64, config: &AgentConfig) -> f64 {
    let h = config.horizon as f64;
    let t = t as f64;
    8.0 * (h.powi(3) * config.iota() / t).sqrt() + 16.0 * config.lipschitz * config.d_max / t.sqrt()
}

/// `clip[mu | nu] = mu 1{mu >= nu}`.
pub fn clip(mu: f64, nu: f64) -> f64 {
    if mu >= nu {
        mu
    } else {
        0.0
    }
}

/// `c1 = 2(H + 1) / d_max + 2L`, the near-optimality constant.
pub fn near_optimal_constant(horizon: usize, d_max: f64, lipschitz: f64) -> f64 {
    2.0 * (horizon as f64 + 1.0) / d_max + 2.0 * lipschitz
}

/// Oracle-grid points of stage `h` with `gap <= c1 r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearOptimalSet {
    pub stage: usize,
    pub r: f64,
    pub c1: f64,
    /// `(grid state, grid action)` index pairs.
    pub members: Vec<(usize, usize)>,
}

impl NearOptimalSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: usize, a: usize) -> bool {
        self.members.binary_search(&(s, a)).is_ok()
    }

    pub fn cloud(&self, oracle: &OracleTables) -> PointCloud {
        let mut cloud = PointCloud::with_capacity(oracle.state_dim, oracle.action_dim, self.members.len());
        for &(s, a) in &self.members {
            let mut row = oracle.state_coords(s);
            row.extend(oracle.action_coords(a));
            cloud.push_row(&row);
        }
        cloud
    }
}

pub fn near_optimal_set(oracle: &OracleTables, h: usize, r: f64, lipschitz: f64) -> Result<NearOptimalSet> {
    let d_max = oracle.metric.d_max;
    if !(r > 0.0 && r <= d_max) {
        return Err(Error::invalid(format!("scale {r} outside (0, d_max]")));
    }
    if h == 0 || h > oracle.horizon {
        return Err(Error::invalid(format!("stage {h} outside 1..={}", oracle.horizon)));
    }
    let c1 = near_optimal_constant(oracle.horizon, d_max, lipschitz);
    let threshold = c1 * r;
    let mut members = Vec::new();
    for s in 0..oracle.n_states() {
        for a in 0..oracle.n_actions() {
            if oracle.gap_at(h, s, a) <= threshold {
                members.push((s, a));
            }
        }
    }
    Ok(NearOptimalSet {
        stage: h,
        r,
        c1,
        members,
    })
}

/// One scale of a zooming or covering profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub r: f64,
    /// Points in the region packed at this scale.
    pub region: usize,
    pub packing: Packing,
}

/// The geometric scales `d_max 2^-i` for `i` in `from..=to`.
pub fn dyadic_scales(d_max: f64, from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|i| d_max / f64::powi(2.0, i as i32)).collect()
}

/// `r`-zooming numbers: the `r`-packing number of `P_{h,r}` at each scale.
pub fn zooming_profile(
    oracle: &OracleTables,
    h: usize,
    scales: &[f64],
    lipschitz: f64,
    exact_threshold: usize,
) -> Result<Vec<ScaleCount>> {
    scales
        .iter()
        .map(|&r| {
            let set = near_optimal_set(oracle, h, r, lipschitz)?;
            let cloud = set.cloud(oracle);
            Ok(ScaleCount {
                r,
                region: cloud.len(),
                packing: packing_number(&cloud, r, &oracle.metric, exact_threshold)?,
            })
        })
        .collect()
}

/// Packing numbers of the whole oracle grid.
pub fn covering_profile(oracle: &OracleTables, scales: &[f64], exact_threshold: usize) -> Result<Vec<ScaleCount>> {
    let mut cloud = PointCloud::with_capacity(
        oracle.state_dim,
        oracle.action_dim,
        oracle.n_states() * oracle.n_actions(),
    );
    for s in 0..oracle.n_states() {
        let x = oracle.state_coords(s);
        for a in 0..oracle.n_actions() {
            let mut row = x.clone();
            row.extend(oracle.action_coords(a));
            cloud.push_row(&row);
        }
    }
    scales
        .iter()
        .map(|&r| {
            Ok(ScaleCount {
                r,
                region: cloud.len(),
                packing: packing_number(&cloud, r, &oracle.metric, exact_threshold)?,
            })
        })
        .collect()
}

/// Least-squares line with a two-standard-error band on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

/// Ordinary least squares of `ys` on `xs`; needs at least three points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::invalid("fit needs equally many x and y values"));
    }
    if n < 3 {
        return Err(Error::invalid(format!("fit needs at least 3 points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit input contains non-finite values"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit needs at least two distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        lo: slope - 2.0 * stderr,
        hi: slope + 2.0 * stderr,
        points: n,
    })
}

/// Growth exponent of `N` in `1/r`: the slope of `ln N` on `ln(1/r)`.
pub fn dimension_fit(counts: &[(f64, f64)]) -> Result<SlopeFit> {
    if counts.len() < 3 {
        return Err(Error::invalid(format!("dimension fit needs at least 3 scales, got {}", counts.len())));
    }
    if counts.iter().any(|&(r, n)| !(r > 0.0) || !(n > 0.0)) {
        return Err(Error::invalid("dimension fit needs positive scales and counts"));
    }
    let xs: Vec<f64> = counts.iter().map(|&(r, _)| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, n)| n.ln()).collect();
    fit_line(&xs, &ys)
}

/// Profile counts as `(r, N)` pairs for [`dimension_fit`].
pub fn profile_points(profile: &[ScaleCount]) -> Vec<(f64, f64)> {
    profile.iter().map(|s| (s.r, s.packing.count as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub episodes: usize,
    pub eps_grid: f64,
    /// `V*_1(x_1^k)` per episode.
    pub v_star: Vec<f64>,
    pub returns: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub total: f64,
    /// Log-log fit of cumulative regret over checkpoints between `K/100` and
    /// `K`; absent when fewer than three checkpoints carry positive regret.
    pub slope: Option<SlopeFit>,
}

/// Number of log-spaced checkpoints used by [`regret_slope`].
pub const REGRET_CHECKPOINTS: usize = 20;

/// Log-log slope of a cumulative regret curve over log-spaced checkpoints
/// from `K/100` to `K`. Non-positive values are skipped.
pub fn regret_slope(cumulative: &[f64]) -> Option<SlopeFit> {
    let k = cumulative.len();
    if k < 3 {
        return None;
    }
    let first = (k as f64 / 100.0).max(1.0);
    let span = (k as f64 / first).ln();
    let mut picks: Vec<usize> = (0..REGRET_CHECKPOINTS)
        .map(|j| {
            let e = first * (span * j as f64 / (REGRET_CHECKPOINTS - 1) as f64).exp();
            (e.round() as usize).clamp(1, k)
        })
        .collect();
    picks.dedup();
    let (xs, ys): (Vec<f64>, Vec<f64>) = picks
        .into_iter()
        .filter(|&e| cumulative[e - 1] > 0.0)
        .map(|e| ((e as f64).ln(), cumulative[e - 1].ln()))
        .unzip();
    fit_line(&xs, &ys).ok()
}

/// `Reg(K) = sum_k (V*_1(x_1^k) - sum_h r_h^k)`, with episodes `1..=K` in
/// order.
pub fn regret(logs: &[EpisodeLog], oracle: &OracleTables) -> Result<RegretReport> {
    for (i, log) in logs.iter().enumerate() {
        if log.episode != i + 1 {
            return Err(Error::invalid(format!(
                "episode log {} found where episode {} was expected",
                log.episode,
                i + 1
            )));
        }
        if log.steps.len() != oracle.horizon {
            return Err(Error::invalid(format!("episode {} is incomplete", log.episode)));
        }
    }
    let v_star: Vec<f64> = logs.iter().map(|l| oracle.v_star(1, &l.initial_state)).collect();
    let returns: Vec<f64> = logs.iter().map(|l| l.total_reward).collect();
    let mut acc = 0.0;
    let cumulative: Vec<f64> = v_star
        .iter()
        .zip(&returns)
        .map(|(v, r)| {
            acc += v - r;
            acc
        })
        .collect();
    Ok(RegretReport {
        episodes: logs.len(),
        eps_grid: oracle.eps_grid,
        slope: regret_slope(&cumulative),
        total: acc,
        v_star,
        returns,
        cumulative,
    })
}

/// One visited `(h, k)` of the clipped-surplus ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurplusRecord {
    pub episode: usize,
    pub stage: usize,
    pub ball: usize,
    /// Count of the ball before this visit.
    pub n: u64,
    pub beta: f64,
    pub gap: f64,
    /// `clip[beta_n | gap / (H + 1)]`.
    pub clipped: f64,
    /// `clip[1 / sqrt(n) | gap / (H + 1)]`, the scale-free surplus that the
    /// case analysis compares against the gap (0 when `n = 0`).
    pub clipped_unit: f64,
}

/// Clipping summary of one ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSurplus {
    pub stage: usize,
    pub ball: usize,
    pub radius: f64,
    pub visits: usize,
    pub min_gap: f64,
    pub min_n: u64,
    pub clipped_total: f64,
    pub unit_total: f64,
    /// `min_gap >= 2(H + 1) r / d_max`.
    pub large_gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusLedger {
    pub total: f64,
    pub unclipped_total: f64,
    pub unit_total: f64,
    /// `eps_grid L`: oracle gaps are exact on the grid only up to this.
    pub grid_slack: f64,
    pub records: Vec<SurplusRecord>,
    pub balls: Vec<BallSurplus>,
}

impl SurplusLedger {
    /// Large-gap balls whose scale-free surplus was not fully clipped.
    pub fn unclipped_large_gap_balls(&self) -> Vec<&BallSurplus> {
        self.balls.iter().filter(|b| b.large_gap && b.unit_total > 0.0).collect()
    }
}

/// `sum_h sum_k clip[beta_n | gap_h(x_h^k, a_h^k) / (H + 1)]` with per-ball
/// breakdown, where `n` is the ball's count before the visit.
pub fn clipped_surplus_ledger(logs: &[EpisodeLog], oracle: &OracleTables, config: &AgentConfig) -> SurplusLedger {
    let h1 = config.horizon as f64 + 1.0;
    let max_n = crate::agent::steps(logs).map(|s| s.t).max().unwrap_or(1);
    let betas = beta_sequence(max_n, config);
    let mut records = Vec::new();
    let mut per_ball: BTreeMap<(usize, usize), BallSurplus> = BTreeMap::new();
    for step in crate::agent::steps(logs) {
        let n = step.t - 1;
        let gap = oracle.gap(step.stage, &step.state, &step.action);
        let nu = gap / h1;
        let beta_n = betas[n as usize];
        let unit = if n == 0 { 0.0 } else { 1.0 / (n as f64).sqrt() };
        let rec = SurplusRecord {
            episode: step.episode,
            stage: step.stage,
            ball: step.ball,
            n,
            beta: beta_n,
            gap,
            clipped: clip(beta_n, nu),
            clipped_unit: clip(unit, nu),
        };
        let entry = per_ball.entry((step.stage, step.ball)).or_insert(BallSurplus {
            stage: step.stage,
            ball: step.ball,
            radius: step.radius,
            visits: 0,
            min_gap: f64::INFINITY,
            min_n: u64::MAX,
            clipped_total: 0.0,
            unit_total: 0.0,
            large_gap: false,
        });
        entry.visits += 1;
        entry.min_gap = entry.min_gap.min(gap);
        entry.min_n = entry.min_n.min(n);
        entry.clipped_total += rec.clipped;
        entry.unit_total += rec.clipped_unit;
        records.push(rec);
    }
    let mut balls: Vec<BallSurplus> = per_ball.into_values().collect();
    for b in &mut balls {
        b.large_gap = b.min_gap >= 2.0 * h1 * b.radius / config.d_max;
    }
    SurplusLedger {
        total: records.iter().map(|r| r.clipped).sum(),
        unclipped_total: records.iter().map(|r| r.beta).sum(),
        unit_total: records.iter().map(|r| r.clipped_unit).sum(),
        grid_slack: oracle.eps_grid * config.lipschitz,
        records,
        balls,
    }
}

/// Numeric right-hand side of the regret theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub value: f64,
    pub constant_term: f64,
    pub martingale_term: f64,
    /// Per stage: the minimizing `r0` and the minimized inner sum.
    pub stage_terms: Vec<(f64, f64)>,
}

/// `9H^2 + 18 sqrt(2 H^3 K iota) + sum_h 288 (sqrt(H^3 iota) + L d_max)
/// min_{r0} (sum_{r >= r0} N_r d_max / r + K r0 / d_max)`, with `r0` ranging
/// over the profile scales and `N_r` the packing upper bounds.
pub fn theorem_bound(profiles: &[Vec<ScaleCount>], config: &AgentConfig) -> Result<TheoremBound> {
    if profiles.len() != config.horizon {
        return Err(Error::invalid(format!(
            "theorem bound needs {} stage profiles, got {}",
            config.horizon,
            profiles.len()
        )));
    }
    let h = config.horizon as f64;
    let k = config.episodes as f64;
    let iota = config.iota();
    let d_max = config.d_max;
    let factor = 288.0 * ((h.powi(3) * iota).sqrt() + config.lipschitz * d_max);
    let mut stage_terms = Vec::with_capacity(profiles.len());
    for profile in profiles {
        if profile.is_empty() {
            return Err(Error::invalid("empty zooming profile"));
        }
        let best = profile
            .iter()
            .map(|cand| {
                let sum: f64 = profile
                    .iter()
                    .filter(|s| s.r >= cand.r)
                    .map(|s| s.packing.upper as f64 * d_max / s.r)
                    .sum();
                (cand.r, sum + k * cand.r / d_max)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty profile");
        stage_terms.push(best);
    }
    let constant_term = 9.0 * h * h;
    let martingale_term = 18.0 * (2.0 * h.powi(3) * k * iota).sqrt();
    let value = constant_term + martingale_term + factor * stage_terms.iter().map(|t| t.1).sum::<f64>();
    Ok(TheoremBound {
        value,
        constant_term,
        martingale_term,
        stage_terms,
    })
}

/// From-scratch partition audit of every stage.
pub fn check_partition(trees: &[PartitionTree]) -> Vec<PartitionReport> {
    trees.iter().map(PartitionTree::audit).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountViolation {
    pub stage: usize,
    pub ball: usize,
    pub depth: u32,
    pub selections: u64,
    pub selection_bound: u64,
    pub inherited: u64,
    pub expected_inherited: u64,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub balls_checked: usize,
    pub violations: Vec<CountViolation>,
    /// Balls at the depth cap, which never split and so have no selection
    /// bound: `(stage, ball, selections)`.
    pub capped: Vec<(usize, usize, u64)>,
    /// Largest ratio of selections to the bound `ceil(3/4 4^depth) + 1`.
    pub max_ratio: f64,
}

impl CountReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-ball selection bound `ceil((3/4)(d_max/r)^2) + 1`.
pub fn selection_bound(depth: u32) -> u64 {
    let four = PartitionTree::split_threshold(depth);
    (3 * four).div_ceil(4) + 1
}

/// Count audit: selections within the bound, inherited counts equal to
/// `(1/4)(d_max/r)^2` for non-roots, and counts conserved.
pub fn check_counts(trees: &[PartitionTree]) -> CountReport {
    let mut report = CountReport::default();
    for tree in trees {
        if !tree.splitting() {
            continue;
        }
        for b in tree.balls() {
            report.balls_checked += 1;
            let at_cap = b.depth == tree.max_depth();
            let bound = selection_bound(b.depth);
            let expected = if b.parent.is_some() {
                PartitionTree::split_threshold(b.depth) / 4
            } else {
                0
            };
            if at_cap {
                report.capped.push((tree.stage, b.id, b.selections));
            } else {
                report.max_ratio = report.max_ratio.max(b.selections as f64 / bound as f64);
            }
            let too_many = !at_cap && b.selections > bound;
            if too_many || b.inherited != expected || b.count != b.inherited + b.selections {
                report.violations.push(CountViolation {
                    stage: tree.stage,
                    ball: b.id,
                    depth: b.depth,
                    selections: b.selections,
                    selection_bound: bound,
                    inherited: b.inherited,
                    expected_inherited: expected,
                    count: b.count,
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimismViolation {
    pub episode: usize,
    pub stage: usize,
    pub ball: usize,
    pub q: f64,
    pub q_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimismReport {
    pub slack: f64,
    pub steps: usize,
    pub violations: usize,
    /// Up to 16 of the violations.
    pub sample: Vec<OptimismViolation>,
    /// Smallest `Q(B) - Q*(x, a)` seen.
    pub min_margin: f64,
}

impl OptimismReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// Counts visited `(h, k)` where the selected ball's estimate falls below
/// `Q*_h(x, a) - slack`.
pub fn check_optimism(logs: &[EpisodeLog], oracle: &OracleTables, slack: f64) -> OptimismReport {
    let mut report = OptimismReport {
        slack,
        steps: 0,
        violations: 0,
        sample: Vec::new(),
        min_margin: f64::INFINITY,
    };
    for step in crate::agent::steps(logs) {
        report.steps += 1;
        let q_star = oracle.q_star(step.stage, &step.state, &step.action);
        report.min_margin = report.min_margin.min(step.q_before - q_star);
        if step.q_before < q_star - slack {
            report.violations += 1;
            if report.sample.len() < 16 {
                report.sample.push(OptimismViolation {
                    episode: step.episode,
                    stage: step.stage,
                    ball: step.ball,
                    q: step.q_before,
                    q_star,
                });
            }
        }
    }
    report
}

/// Of the active balls at the two smallest radii present in each stage, how
/// many have centers inside the oracle near-optimal set at their own scale:
/// `(inside, total)`.
pub fn fine_ball_alignment(trees: &[PartitionTree], oracle: &OracleTables, lipschitz: f64) -> Result<(usize, usize)> {
    let (mut inside, mut total) = (0, 0);
    for tree in trees {
        let mut depths: Vec<u32> = tree.active().map(|b| b.depth).collect();
        depths.sort_unstable();
        depths.dedup();
        let fine: Vec<u32> = depths.iter().rev().take(2).copied().collect();
        let c1 = near_optimal_constant(oracle.horizon, oracle.metric.d_max, lipschitz);
        for b in tree.active().filter(|b| fine.contains(&b.depth)) {
            total += 1;
            if oracle.gap(tree.stage, &b.center.state, &b.center.action) <= c1 * b.radius {
                inside += 1;
            }
        }
    }
    Ok((inside, total))
}
