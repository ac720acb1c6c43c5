//! Ground-truth `Q*`, `V*` and gaps of the grid-discretized MDP.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Environment, Kernel};
use crate::error::{Error, Result};
use crate::metric::MetricSpec;

/// Default ceiling on `H * |state grid| * |action grid|`.
pub const DEFAULT_ORACLE_CAP: usize = 50_000_000;

/// Backward-induction tables on a uniform grid with `intervals` cells per
/// coordinate. Off-grid queries snap to the nearest grid point.
#[derive(Debug, Clone)]
pub struct OracleTables {
    pub horizon: usize,
    pub intervals: usize,
    pub eps_grid: f64,
    pub state_dim: usize,
    pub action_dim: usize,
    pub metric: MetricSpec,
    /// Monte Carlo draws per cell when the kernel has no closed form.
    pub mc_samples: Option<usize>,
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
    v: Vec<f64>,
}

/// Empirical Lipschitz constants of `Q*` (under `D`) and `V*` (under the
/// derived state metric).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub q: f64,
    pub v: f64,
}

fn decompose(mut idx: usize, dim: usize, side: usize, out: &mut [usize]) {
    for k in (0..dim).rev() {
        out[k] = idx % side;
        idx /= side;
    }
}

impl OracleTables {
    pub fn build(env: &Environment, eps_grid: f64) -> Result<Self> {
        Self::build_with_cap(env, eps_grid, DEFAULT_ORACLE_CAP)
    }

    pub fn build_with_cap(env: &Environment, eps_grid: f64, cap: usize) -> Result<Self> {
        if !(eps_grid > 0.0 && eps_grid <= 1.0) {
            return Err(Error::invalid(format!("grid resolution {eps_grid} outside (0, 1]")));
        }
        let intervals = (1.0 / eps_grid).round() as usize;
        if ((intervals as f64) * eps_grid - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "grid resolution {eps_grid} does not divide the unit interval"
            )));
        }
        let side = intervals + 1;
        let n_states = side.checked_pow(env.state_dim as u32);
        let n_actions = side.checked_pow(env.action_dim as u32);
        let cells = n_states
            .zip(n_actions)
            .and_then(|(s, a)| s.checked_mul(a))
            .and_then(|c| c.checked_mul(env.horizon));
        let (n_states, n_actions) = match (cells, n_states, n_actions) {
            (Some(c), Some(s), Some(a)) if c <= cap => (s, a),
            _ => {
                return Err(Error::Resource(format!(
                    "oracle grid at resolution {eps_grid} exceeds the cap of {cap} cells"
                )))
            }
        };

        let mut tables = OracleTables {
            horizon: env.horizon,
            intervals,
            eps_grid: 1.0 / intervals as f64,
            state_dim: env.state_dim,
            action_dim: env.action_dim,
            metric: env.metric,
            mc_samples: match env.kernel() {
                Kernel::Sampled { samples, .. } => Some(*samples),
                _ => None,
            },
            n_states,
            n_actions,
            q: vec![0.0; env.horizon * n_states * n_actions],
            v: vec![0.0; env.horizon * n_states],
        };

        for h in (1..=env.horizon).rev() {
            let v_next: Option<Vec<f64>> = (h < env.horizon).then(|| tables.v_slice(h + 1).to_vec());
            let this = &tables;
            let rows: Vec<(Vec<f64>, f64)> = (0..n_states)
                .into_par_iter()
                .map(|s| {
                    let x = this.state_coords(s);
                    let mut row = Vec::with_capacity(n_actions);
                    for a in 0..n_actions {
                        let act = this.action_coords(a);
                        let cont = match &v_next {
                            None => 0.0,
                            Some(vn) => this.expected_next(env, h, s, a, &x, &act, vn),
                        };
                        row.push(env.reward(h, &x, &act) + cont);
                    }
                    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (row, best)
                })
                .collect();
            for (s, (row, best)) in rows.into_iter().enumerate() {
                let base = tables.q_index(h, s, 0);
                tables.q[base..base + n_actions].copy_from_slice(&row);
                let vi = tables.v_index(h, s);
                tables.v[vi] = best;
            }
        }
        Ok(tables)
    }

    #[allow(clippy::too_many_arguments)]
    fn expected_next(
        &self,
        env: &Environment,
        h: usize,
        s: usize,
        a: usize,
        x: &[f64],
        act: &[f64],
        v_next: &[f64],
    ) -> f64 {
        match env.kernel() {
            Kernel::Deterministic(f) => v_next[self.snap_state(&f(h, x, act))],
            Kernel::UniformNoise { mean, width } => {
                let mu = mean(h, x, act);
                let per_dim: Vec<Vec<(usize, f64)>> =
                    mu.iter().map(|&m| self.uniform_cell_masses(m, *width)).collect();
                let mut total = 0.0;
                let mut pick = vec![0usize; per_dim.len()];
                loop {
                    let mut flat = 0;
                    let mut w = 1.0;
                    for (k, masses) in per_dim.iter().enumerate() {
                        let (j, m) = masses[pick[k]];
                        flat = flat * (self.intervals + 1) + j;
                        w *= m;
                    }
                    total += w * v_next[flat];
                    let mut k = per_dim.len();
                    loop {
                        if k == 0 {
                            return total;
                        }
                        k -= 1;
                        pick[k] += 1;
                        if pick[k] < per_dim[k].len() {
                            break;
                        }
                        pick[k] = 0;
                    }
                }
            }
            Kernel::Sampled { sampler, samples } => {
                let seed = ((h as u64) << 48) ^ ((s as u64) << 24) ^ a as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0ac1_e5ee_d000_0000);
                let n = (*samples).max(1);
                let sum: f64 = (0..n)
                    .map(|_| v_next[self.snap_state(&sampler(h, x, act, &mut rng))])
                    .sum();
                sum / n as f64
            }
        }
    }

    /// Probability that `clamp(mu + U(-w/2, w/2))` snaps to each grid index.
    fn uniform_cell_masses(&self, mu: f64, width: f64) -> Vec<(usize, f64)> {
        let n = self.intervals as f64;
        if width <= 0.0 {
            return vec![(self.snap_coord(mu), 1.0)];
        }
        let (lo, hi) = (mu - width / 2.0, mu + width / 2.0);
        let first = self.snap_coord(lo);
        let last = self.snap_coord(hi);
        (first..=last)
            .filter_map(|j| {
                let c_lo = if j == 0 { f64::NEG_INFINITY } else { (j as f64 - 0.5) / n };
                let c_hi = if j == self.intervals { f64::INFINITY } else { (j as f64 + 0.5) / n };
                let m = (hi.min(c_hi) - lo.max(c_lo)).max(0.0) / width;
                (m > 0.0).then_some((j, m))
            })
            .collect()
    }

    fn q_index(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * self.n_states + s) * self.n_actions + a
    }

    fn v_index(&self, h: usize, s: usize) -> usize {
        (h - 1) * self.n_states + s
    }

    fn v_slice(&self, h: usize) -> &[f64] {
        let base = self.v_index(h, 0);
        &self.v[base..base + self.n_states]
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn coords(&self, idx: usize, dim: usize) -> Vec<f64> {
        let mut parts = vec![0usize; dim];
        decompose(idx, dim, self.intervals + 1, &mut parts);
        parts.into_iter().map(|j| j as f64 / self.intervals as f64).collect()
    }

    pub fn state_coords(&self, s: usize) -> Vec<f64> {
        self.coords(s, self.state_dim)
    }

    pub fn action_coords(&self, a: usize) -> Vec<f64> {
        self.coords(a, self.action_dim)
    }

    fn snap_coord(&self, v: f64) -> usize {
        let n = self.intervals as f64;
        (v.clamp(0.0, 1.0) * n).round().clamp(0.0, n) as usize
    }

    fn snap(&self, v: &[f64]) -> usize {
        v.iter()
            .fold(0, |acc, &c| acc * (self.intervals + 1) + self.snap_coord(c))
    }

    /// Nearest grid state (per-coordinate rounding is the nearest point
    /// under every supported state metric).
    pub fn snap_state(&self, x: &[f64]) -> usize {
        self.snap(x)
    }

    pub fn snap_action(&self, a: &[f64]) -> usize {
        self.snap(a)
    }

    pub fn q_at(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.q_index(h, s, a)]
    }

    pub fn v_at(&self, h: usize, s: usize) -> f64 {
        self.v[self.v_index(h, s)]
    }

    pub fn gap_at(&self, h: usize, s: usize, a: usize) -> f64 {
        self.v_at(h, s) - self.q_at(h, s, a)
    }

    pub fn q_star(&self, h: usize, x: &[f64], a: &[f64]) -> f64 {
        self.q_at(h, self.snap_state(x), self.snap_action(a))
    }

    pub fn v_star(&self, h: usize, x: &[f64]) -> f64 {
        self.v_at(h, self.snap_state(x))
    }

    /// `gap_h(x, a) = V*_h(x) - Q*_h(x, a)` at the snapped grid cell.
    pub fn gap(&self, h: usize, x: &[f64], a: &[f64]) -> f64 {
        self.gap_at(h, self.snap_state(x), self.snap_action(a))
    }

    /// Index of a grid-optimal action (lowest index among ties).
    pub fn argmax_action(&self, h: usize, s: usize) -> usize {
        let base = self.q_index(h, s, 0);
        let row = &self.q[base..base + self.n_actions];
        let mut best = 0;
        for (a, &q) in row.iter().enumerate() {
            if q > row[best] {
                best = a;
            }
        }
        best
    }

    /// Largest violation of `V*_h = max_a Q*_h` and of the Bellman
    /// recursion when `Q*` is recomputed from the stored `V*`.
    pub fn bellman_residual(&self, env: &Environment) -> f64 {
        let mut worst = 0.0_f64;
        for h in 1..=self.horizon {
            let v_next = (h < self.horizon).then(|| self.v_slice(h + 1).to_vec());
            for s in 0..self.n_states {
                let x = self.state_coords(s);
                let mut best = f64::NEG_INFINITY;
                for a in 0..self.n_actions {
                    let act = self.action_coords(a);
                    let cont = v_next
                        .as_ref()
                        .map_or(0.0, |vn| self.expected_next(env, h, s, a, &x, &act, vn));
                    let q = env.reward(h, &x, &act) + cont;
                    worst = worst.max((q - self.q_at(h, s, a)).abs());
                    best = best.max(self.q_at(h, s, a));
                }
                worst = worst.max((best - self.v_at(h, s)).abs());
            }
        }
        worst
    }

    /// Largest difference ratio of `Q*` over grid pairs within two steps of
    /// each other plus a fixed-seed sample of long-range pairs; likewise for
    /// `V*` under the derived state metric.
    pub fn estimate_lipschitz(&self) -> LipschitzEstimate {
        let side = self.intervals + 1;
        let dim = self.state_dim + self.action_dim;
        let n_joint = self.n_states * self.n_actions;
        let split = |j: usize| (j / self.n_actions, j % self.n_actions);
        let joint_coords = |j: usize| {
            let (s, a) = split(j);
            let mut c = self.state_coords(s);
            c.extend(self.action_coords(a));
            c
        };

        let mut offsets: Vec<Vec<i64>> = Vec::new();
        let mut cur = vec![-2i64; dim];
        loop {
            if cur.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
                offsets.push(cur.clone());
            }
            let mut k = dim;
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                if cur[k] < 2 {
                    cur[k] += 1;
                    break false;
                }
                cur[k] = -2;
            };
            if done {
                break;
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x11b5);
        let random_pairs: Vec<(usize, usize)> = (0..20_000)
            .map(|_| (rng.gen_range(0..n_joint), rng.gen_range(0..n_joint)))
            .collect();

        let mut q_ratio = 0.0_f64;
        let mut parts = vec![0usize; dim];
        for h in 1..=self.horizon {
            let mut consider = |i: usize, j: usize| {
                if i == j {
                    return;
                }
                let (si, ai) = split(i);
                let (sj, aj) = split(j);
                let d = self
                    .metric
                    .joint_distance(&joint_coords(i), &joint_coords(j), self.state_dim);
                if d > 0.0 {
                    let diff = (self.q_at(h, si, ai) - self.q_at(h, sj, aj)).abs();
                    q_ratio = q_ratio.max(diff / d);
                }
            };
            for i in 0..n_joint {
                let (s, a) = split(i);
                decompose(s, self.state_dim, side, &mut parts[..self.state_dim]);
                decompose(a, self.action_dim, side, &mut parts[self.state_dim..]);
                'offs: for off in &offsets {
                    let mut j = 0usize;
                    let mut js = 0usize;
                    for k in 0..dim {
                        let c = parts[k] as i64 + off[k];
                        if c < 0 || c >= side as i64 {
                            continue 'offs;
                        }
                        if k == self.state_dim {
                            js = j;
                            j = 0;
                        }
                        j = j * side + c as usize;
                    }
                    consider(i, js * self.n_actions + j);
                }
            }
            for &(i, j) in &random_pairs {
                consider(i, j);
            }
        }

        let mut v_ratio = 0.0_f64;
        let zeros = vec![0.0; self.action_dim];
        for h in 1..=self.horizon {
            for s in 0..self.n_states {
                let xs = self.state_coords(s);
                for t in s + 1..self.n_states.min(s + 3) {
                    let xt = self.state_coords(t);
                    let d = self.metric.split_distance(&xs, &zeros, &xt, &zeros);
                    if d > 0.0 {
                        v_ratio = v_ratio.max((self.v_at(h, s) - self.v_at(h, t)).abs() / d);
                    }
                }
            }
            for &(i, j) in &random_pairs {
                let (s, t) = (split(i).0, split(j).0);
                let d = self
                    .metric
                    .split_distance(&self.state_coords(s), &zeros, &self.state_coords(t), &zeros);
                if d > 0.0 {
                    v_ratio = v_ratio.max((self.v_at(h, s) - self.v_at(h, t)).abs() / d);
                }
            }
        }
        LipschitzEstimate { q: q_ratio, v: v_ratio }
    }

    /// Writes `h, x..., a..., Qstar, Vstar, gap` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["h".to_string()];
        header.extend((0..self.state_dim).map(|k| format!("x{k}")));
        header.extend((0..self.action_dim).map(|k| format!("a{k}")));
        header.extend(["Qstar", "Vstar", "gap"].map(String::from));
        w.write_record(&header)?;
        for h in 1..=self.horizon {
            for s in 0..self.n_states {
                let x = self.state_coords(s);
                for a in 0..self.n_actions {
                    let mut rec = vec![h.to_string()];
                    rec.extend(x.iter().map(|v| v.to_string()));
                    rec.extend(self.action_coords(a).iter().map(|v| v.to_string()));
                    rec.push(self.q_at(h, s, a).to_string());
                    rec.push(self.v_at(h, s).to_string());
                    rec.push(self.gap_at(h, s, a).to_string());
                    w.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::env::InitialStates;
    use crate::metric::MetricKind;

    #[test]
    fn single_stage_is_reward() {
        let env = Environment::by_name("line-bandit", None, 0).unwrap();
        let o = OracleTables::build(&env, 1.0 / 16.0).unwrap();
        for s in 0..o.n_states() {
            for a in 0..o.n_actions() {
                let r = env.reward(1, &o.state_coords(s), &o.action_coords(a));
                assert_eq!(o.q_at(1, s, a), r);
            }
        }
    }

    #[test]
    fn line_bandit_gap_is_distance_to_context() {
        let env = Environment::by_name("line-bandit", None, 0).unwrap();
        let o = OracleTables::build(&env, 1.0 / 32.0).unwrap();
        for (x, a) in [(0.25, 0.75), (0.5, 0.5), (1.0, 0.0), (0.125, 0.5)] {
            assert!((o.gap(1, &[x], &[a]) - (a - x).abs()).abs() < 1e-12);
        }
        let s = o.snap_state(&[0.5]);
        assert_eq!(o.gap_at(1, s, o.argmax_action(1, s)), 0.0);
    }

    /// Two-state, two-action chain with H = 2, solved by hand:
    /// states {0, 1}, actions {0, 1}; reward r(x, a) = 0.5 * a + 0.25 * x,
    /// next state x' = a.
    #[test]
    fn toy_chain_matches_hand_backward_induction() {
        let env = Environment::new(
            "toy",
            2,
            MetricSpec::unit_box(MetricKind::ProductMax, 1, 1),
            1,
            1,
            1.0,
            InitialStates::Fixed(vec![0.0]),
            Arc::new(|_, x, a| 0.5 * a[0] + 0.25 * x[0]),
            Kernel::Deterministic(Arc::new(|_, _, a| vec![a[0]])),
        )
        .unwrap();
        let o = OracleTables::build(&env, 1.0).unwrap();
        // Stage 2: Q = r. V2(0) = 0.5, V2(1) = 0.75.
        assert_eq!(o.q_at(2, 0, 0), 0.0);
        assert_eq!(o.q_at(2, 0, 1), 0.5);
        assert_eq!(o.q_at(2, 1, 0), 0.25);
        assert_eq!(o.q_at(2, 1, 1), 0.75);
        // Stage 1: Q(x, a) = r(x, a) + V2(a).
        assert_eq!(o.q_at(1, 0, 0), 0.5);
        assert_eq!(o.q_at(1, 0, 1), 1.25);
        assert_eq!(o.q_at(1, 1, 0), 0.75);
        assert_eq!(o.q_at(1, 1, 1), 1.5);
        assert_eq!(o.v_at(1, 0), 1.25);
        assert_eq!(o.v_at(1, 1), 1.5);
        assert_eq!(o.gap_at(1, 1, 0), 0.75);
    }

    #[test]
    fn gaps_nonnegative_and_bounded_everywhere() {
        for name in crate::env::SHIPPED {
            let env = Environment::by_name(name, None, 0).unwrap();
            let o = OracleTables::build(&env, 1.0 / 64.0).unwrap();
            for h in 1..=o.horizon {
                for s in 0..o.n_states() {
                    assert_eq!(o.gap_at(h, s, o.argmax_action(h, s)), 0.0);
                    for a in 0..o.n_actions() {
                        let g = o.gap_at(h, s, a);
                        assert!(g >= 0.0 && g <= o.horizon as f64, "{name}: gap {g}");
                    }
                }
            }
            assert!(o.bellman_residual(&env) <= 1e-9, "{name}");
        }
    }

    #[test]
    fn band_gap_matches_analytic_offset() {
        let env = Environment::by_name("band-mdp", Some(3), 0).unwrap();
        let o = OracleTables::build(&env, 1.0 / 64.0).unwrap();
        for h in 1..=3 {
            for (x, a) in [(0.1, 0.9), (0.5, 0.25), (0.75, 0.1), (0.3, 0.3)] {
                let xs = (x * 64.0_f64).round() / 64.0;
                let want = (a - crate::env::band_optimal_action(xs)).abs();
                assert!((o.gap(h, &[x], &[a]) - want).abs() <= 1.0 / 64.0, "h={h} x={x} a={a}");
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let env = Environment::by_name("band-mdp", Some(3), 0).unwrap();
        let err = OracleTables::build_with_cap(&env, 1.0 / 64.0, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert!(OracleTables::build(&env, 0.3).is_err());
    }

    #[test]
    fn monte_carlo_fallback_tracks_exact_integration() {
        let noisy = Environment::by_name("noisy-band-mdp", Some(2), 0).unwrap();
        let Kernel::UniformNoise { mean, width } = noisy.kernel().clone() else {
            unreachable!()
        };
        // A reward that varies with the state so that E[V*_2(x')] matters.
        let reward: crate::env::RewardFn =
            Arc::new(|_, x, a| 0.5 * x[0] + 0.25 * (1.0 - (a[0] - 0.5).abs()));
        let exact = Environment::new(
            "noisy-exact",
            2,
            noisy.metric,
            1,
            1,
            1.0,
            noisy.initial.clone(),
            reward.clone(),
            noisy.kernel().clone(),
        )
        .unwrap();
        let sampled = Environment::new(
            "noisy-sampled",
            2,
            noisy.metric,
            1,
            1,
            1.0,
            noisy.initial.clone(),
            reward,
            Kernel::Sampled {
                sampler: Arc::new(move |h, x, a, rng| {
                    mean(h, x, a)
                        .into_iter()
                        .map(|m| (m + width * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0))
                        .collect()
                }),
                samples: 400,
            },
        )
        .unwrap();
        let a = OracleTables::build(&exact, 1.0 / 16.0).unwrap();
        let b = OracleTables::build(&sampled, 1.0 / 16.0).unwrap();
        assert_eq!(b.mc_samples, Some(400));
        for s in 0..a.n_states() {
            for act in 0..a.n_actions() {
                assert!((a.q_at(1, s, act) - b.q_at(1, s, act)).abs() < 0.01);
            }
        }
    }

    #[test]
    fn lipschitz_estimates() {
        let flat = Environment::by_name("flat-mdp", None, 0).unwrap();
        let o = OracleTables::build(&flat, 1.0 / 32.0).unwrap();
        let est = o.estimate_lipschitz();
        assert_eq!(est.q, 0.0);
        assert_eq!(est.v, 0.0);

        // 1 - |a - x| has slope 1 along each axis but 2 along the
        // anti-diagonal, which is a unit step under the max metric.
        let line = Environment::by_name("line-bandit", None, 0).unwrap();
        let o = OracleTables::build(&line, 1.0 / 32.0).unwrap();
        let est = o.estimate_lipschitz();
        assert!((est.q - 2.0).abs() < 1e-9, "{est:?}");
        assert_eq!(est.v, 0.0);

        for name in crate::env::SHIPPED {
            let env = Environment::by_name(name, None, 0).unwrap();
            let o = OracleTables::build(&env, 1.0 / 32.0).unwrap();
            let est = o.estimate_lipschitz();
            assert!(est.q <= env.lipschitz_hint * (1.0 + 1e-9), "{name}: {est:?}");
        }
    }

    #[test]
    fn halving_the_grid_moves_values_by_at_most_lipschitz_times_step() {
        for name in ["band-mdp", "needle-mdp", "line-bandit", "flat-mdp"] {
            let env = Environment::by_name(name, None, 0).unwrap();
            let coarse = OracleTables::build(&env, 1.0 / 32.0).unwrap();
            let fine = OracleTables::build(&env, 1.0 / 64.0).unwrap();
            for x in [0.0, 0.25, 0.5, 0.625, 1.0] {
                let diff = (coarse.v_star(1, &[x]) - fine.v_star(1, &[x])).abs();
                let bound = env.horizon as f64 * env.lipschitz_hint * coarse.eps_grid;
                assert!(diff <= bound + 1e-12, "{name} x={x}: {diff}");
            }
        }
    }

    #[test]
    fn csv_export_has_one_row_per_cell() {
        let env = Environment::by_name("flat-mdp", None, 0).unwrap();
        let o = OracleTables::build(&env, 0.25).unwrap();
        let mut buf = Vec::new();
        o.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "h,x0,a0,Qstar,Vstar,gap");
        assert_eq!(lines.count(), 2 * 5 * 5);
    }
}
