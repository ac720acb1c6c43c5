//! Uniform witness grid over the joint box `[0,1]^(state_dim + action_dim)`.
//!
//! Every set-level computation of the agent (domains, relevance, nets) is
//! evaluated on this grid. Joint indices are row-major with the state
//! coordinates first, so the action fiber of a grid state is a contiguous
//! block of `n_actions` indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricSpec};

/// Default ceiling on the number of joint grid points.
pub const DEFAULT_GRID_CAP: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessGrid {
    pub metric: MetricSpec,
    pub state_dim: usize,
    pub action_dim: usize,
    /// Cells per coordinate; the grid has `intervals + 1` points per axis.
    pub intervals: usize,
    n_states: usize,
    n_actions: usize,
}

impl WitnessGrid {
    /// Grid whose spacing is at most half the radius of the deepest ball,
    /// `d_max / 2^max_depth`. The interval count is the smallest power of
    /// two meeting that bound.
    pub fn for_depth(metric: MetricSpec, state_dim: usize, action_dim: usize, max_depth: u32) -> Result<Self> {
        Self::for_depth_with_cap(metric, state_dim, action_dim, max_depth, DEFAULT_GRID_CAP)
    }

    pub fn for_depth_with_cap(
        metric: MetricSpec,
        state_dim: usize,
        action_dim: usize,
        max_depth: u32,
        cap: usize,
    ) -> Result<Self> {
        if max_depth > 30 {
            return Err(Error::invalid(format!("max split depth {max_depth} exceeds 30")));
        }
        let r_min = metric.d_max / f64::powi(2.0, max_depth as i32);
        let mut intervals = 1usize;
        while 1.0 / (intervals as f64) > r_min / 2.0 {
            intervals *= 2;
        }
        Self::with_intervals_capped(metric, state_dim, action_dim, intervals, cap)
    }

    pub fn with_intervals(metric: MetricSpec, state_dim: usize, action_dim: usize, intervals: usize) -> Result<Self> {
        Self::with_intervals_capped(metric, state_dim, action_dim, intervals, DEFAULT_GRID_CAP)
    }

    fn with_intervals_capped(
        metric: MetricSpec,
        state_dim: usize,
        action_dim: usize,
        intervals: usize,
        cap: usize,
    ) -> Result<Self> {
        if state_dim == 0 || action_dim == 0 || intervals == 0 {
            return Err(Error::invalid("grid dimensions and interval count must be positive"));
        }
        let side = intervals + 1;
        let n_states = side.checked_pow(state_dim as u32);
        let n_actions = side.checked_pow(action_dim as u32);
        match (n_states, n_actions) {
            (Some(s), Some(a)) if s.checked_mul(a).is_some_and(|n| n <= cap) => Ok(WitnessGrid {
                metric,
                state_dim,
                action_dim,
                intervals,
                n_states: s,
                n_actions: a,
            }),
            _ => Err(Error::Resource(format!(
                "witness grid with {side} points per axis in {} dimensions exceeds the cap of {cap} points",
                state_dim + action_dim
            ))),
        }
    }

    pub fn side(&self) -> usize {
        self.intervals + 1
    }

    pub fn dim(&self) -> usize {
        self.state_dim + self.action_dim
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn len(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid spacing `1 / intervals`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    #[inline]
    pub fn coord(&self, i: u32) -> f64 {
        i as f64 / self.intervals as f64
    }

    /// Nearest grid index of a coordinate (halves round up).
    #[inline]
    pub fn snap_coord(&self, v: f64) -> u32 {
        let m = self.intervals as f64;
        (v.clamp(0.0, 1.0) * m + 0.5).floor().min(m) as u32
    }

    pub fn snap(&self, v: &[f64]) -> Vec<u32> {
        v.iter().map(|&c| self.snap_coord(c)).collect()
    }

    /// Flat index of a per-axis index vector.
    pub fn flatten(&self, idx: &[u32]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.side() + i as usize)
    }

    /// Per-axis indices of a flat index over `dim` axes.
    pub fn unflatten(&self, mut flat: usize, dim: usize) -> Vec<u32> {
        let side = self.side();
        let mut out = vec![0u32; dim];
        for k in (0..dim).rev() {
            out[k] = (flat % side) as u32;
            flat /= side;
        }
        out
    }

    pub fn snap_state(&self, x: &[f64]) -> usize {
        self.flatten(&self.snap(x))
    }

    pub fn state_coords(&self, s: usize) -> Vec<f64> {
        self.unflatten(s, self.state_dim).into_iter().map(|i| self.coord(i)).collect()
    }

    pub fn action_coords(&self, a: usize) -> Vec<f64> {
        self.unflatten(a, self.action_dim).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Joint flat index of grid state `s` and grid action `a`.
    #[inline]
    pub fn joint(&self, s: usize, a: usize) -> usize {
        s * self.n_actions + a
    }

    /// Coordinates of a joint flat index, state first.
    pub fn joint_coords(&self, p: usize) -> Vec<f64> {
        self.unflatten(p, self.dim()).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Per-axis index range `lo..=hi` of grid points whose coordinate lies
    /// strictly within `radius` of `center` (an index vector). Every metric
    /// offered dominates single-coordinate differences, so this box contains
    /// the open ball.
    pub fn ball_box(&self, center: &[u32], radius: f64) -> Vec<(u32, u32)> {
        let w = radius * self.intervals as f64;
        let max = self.intervals as f64;
        center
            .iter()
            .map(|&c| {
                let c = c as f64;
                let lo = ((c - w).floor() + 1.0).max(0.0);
                let hi = ((c + w).ceil() - 1.0).min(max);
                (lo as u32, hi.max(lo) as u32)
            })
            .collect()
    }

    /// Visits every joint grid point of the box, passing its flat index and
    /// per-axis indices. The last axis is walked as a contiguous run.
    pub fn for_each_in_box(&self, bounds: &[(u32, u32)], mut f: impl FnMut(usize, &[u32])) {
        self.any_in_box(bounds, |p, idx| {
            f(p, idx);
            false
        });
    }

    /// Whether every ball of this metric coincides with its bounding box on
    /// the grid (true for the max metric).
    pub fn balls_are_boxes(&self) -> bool {
        self.metric.kind == MetricKind::ProductMax
    }

    /// Distance between two joint index vectors (state axes first).
    #[inline]
    pub fn index_distance(&self, p: &[u32], q: &[u32]) -> f64 {
        let m = self.intervals as f64;
        let sd = self.state_dim;
        let delta = |k: usize| (p[k] as f64 - q[k] as f64).abs();
        let linf = |range: std::ops::Range<usize>| range.map(delta).fold(0.0_f64, f64::max);
        match self.metric.kind {
            MetricKind::ProductMax => linf(0..p.len()) / m,
            MetricKind::ProductSum => (linf(0..sd) + linf(sd..p.len())) / m,
            MetricKind::EuclideanJoint => (0..p.len()).map(|k| delta(k) * delta(k)).sum::<f64>().sqrt() / m,
        }
    }

    /// Like [`for_each_in_box`](Self::for_each_in_box) but stops at the first
    /// point for which `f` returns true.
    pub fn any_in_box(&self, bounds: &[(u32, u32)], mut f: impl FnMut(usize, &[u32]) -> bool) -> bool {
        let d = bounds.len();
        if d == 0 || bounds.iter().any(|&(lo, hi)| lo > hi) {
            return false;
        }
        let (last_lo, last_hi) = bounds[d - 1];
        let mut cur: Vec<u32> = bounds.iter().map(|b| b.0).collect();
        loop {
            cur[d - 1] = last_lo;
            let base = self.flatten(&cur);
            for (off, i) in (last_lo..=last_hi).enumerate() {
                cur[d - 1] = i;
                if f(base + off, &cur) {
                    return true;
                }
            }
            let mut k = d - 1;
            loop {
                if k == 0 {
                    return false;
                }
                k -= 1;
                if cur[k] < bounds[k].1 {
                    cur[k] += 1;
                    break;
                }
                cur[k] = bounds[k].0;
            }
        }
    }
}
