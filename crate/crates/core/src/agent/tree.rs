//! The per-stage ball partition `P_h` and its domain geometry.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::grid::WitnessGrid;
use crate::error::{Error, Result};
use crate::metric::{greedy_net, MetricKind, Point, PointCloud};

type CellKey = SmallVec<[i64; 4]>;

/// Nets of whole-ball domains up to this depth are memoized.
const NET_CACHE_DEPTH: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NetKey {
    intervals: usize,
    state_dim: usize,
    action_dim: usize,
    kind: MetricKind,
    d_max_bits: u64,
    center: Vec<u32>,
    depth: u32,
}

/// Child centers (joint grid indices) keyed by the split ball.
fn net_cache() -> &'static Mutex<HashMap<NetKey, Arc<Vec<usize>>>> {
    static CACHE: OnceLock<Mutex<HashMap<NetKey, Arc<Vec<usize>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// How much structural checking accompanies each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitCheck {
    Off,
    /// Verify that the children cover the parent's domain and are separated
    /// from every ball of their radius, at each split.
    #[default]
    Incremental,
    /// Incremental checks plus a from-scratch audit of the whole partition
    /// after every episode.
    Full,
}

/// Tie-break among relevant balls with equal estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smaller radius first, then lower id.
    #[default]
    FinerFirst,
    /// Lower id only.
    LowestId,
}

/// A node of the partition tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub id: usize,
    pub stage: usize,
    pub center: Point,
    /// Witness-grid indices of the center, state axes first.
    pub center_index: Vec<u32>,
    pub depth: u32,
    pub radius: f64,
    pub q_value: f64,
    /// Total count, including the inherited part.
    pub count: u64,
    /// Count copied from the parent at creation.
    pub inherited: u64,
    /// Times this ball itself was selected.
    pub selections: u64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub created_episode: usize,
    pub active: bool,
}

/// Outcome of a from-scratch partition audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub stage: usize,
    pub grid_points: usize,
    /// Grid points lying in no active ball.
    pub uncovered: usize,
    /// Up to 16 uncovered points, as joint coordinates.
    pub uncovered_sample: Vec<Vec<f64>>,
    /// Pairs of same-radius balls whose centers are closer than the radius.
    pub separation: Vec<(usize, usize)>,
    /// Grid points whose cached finest depth disagrees with a recount.
    pub stale_cells: usize,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.uncovered == 0 && self.separation.is_empty() && self.stale_cells == 0
    }
}

/// Balls of one stage over a shared witness grid.
///
/// Alongside the balls the tree keeps, for every grid point, one plus the
/// depth of the deepest active ball containing it (0 if none). A grid point
/// lies in `dom(B)` exactly when it lies in `B` and that depth equals
/// `depth(B)`, since deeper means strictly smaller radius.
#[derive(Debug, Clone)]
pub struct PartitionTree {
    pub stage: usize,
    grid: Arc<WitnessGrid>,
    balls: Vec<Ball>,
    finest: Vec<u8>,
    max_depth: u32,
    splitting: bool,
    check: SplitCheck,
    tie_break: TieBreak,
    /// Active balls per depth, bucketed by state cell of width `radius`.
    active_cols: Vec<HashMap<CellKey, Vec<usize>>>,
    /// All balls per depth, bucketed by joint cell of width `radius`.
    all_cells: Vec<HashMap<CellKey, Vec<usize>>>,
}

/// Options shared by every tree of an agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    pub max_depth: u32,
    pub splitting: bool,
    pub check: SplitCheck,
    pub tie_break: TieBreak,
}

impl PartitionTree {
    /// A single root ball of radius `d_max` centered in the box, with
    /// estimate `q0` (Alg. 1 initializes it to `H`).
    pub fn new(stage: usize, grid: Arc<WitnessGrid>, q0: f64, options: TreeOptions) -> Result<Self> {
        let center = vec![0.5; grid.dim()];
        Self::with_balls(stage, grid, &[(center, 0)], q0, options)
    }

    /// A tree whose active set is the given `(joint center, depth)` list.
    /// Centers snap to the witness grid; root-like balls get no parent.
    pub fn with_balls(
        stage: usize,
        grid: Arc<WitnessGrid>,
        centers: &[(Vec<f64>, u32)],
        q0: f64,
        options: TreeOptions,
    ) -> Result<Self> {
        if options.max_depth > 250 {
            return Err(Error::invalid("max split depth must stay below 250"));
        }
        let mut tree = PartitionTree {
            stage,
            finest: vec![0; grid.len()],
            grid,
            balls: Vec::new(),
            max_depth: options.max_depth,
            splitting: options.splitting,
            check: options.check,
            tie_break: options.tie_break,
            active_cols: vec![HashMap::new(); options.max_depth as usize + 1],
            all_cells: vec![HashMap::new(); options.max_depth as usize + 1],
        };
        for (c, depth) in centers {
            if c.len() != tree.grid.dim() {
                return Err(Error::invalid("ball center has the wrong dimension"));
            }
            if *depth > options.max_depth {
                return Err(Error::invalid(format!("ball depth {depth} beyond the cap {}", options.max_depth)));
            }
            let idx = tree.grid.snap(c);
            let id = tree.insert(idx, *depth, q0, 0, None, 0);
            tree.paint(id);
        }
        Ok(tree)
    }

    pub fn grid(&self) -> &WitnessGrid {
        &self.grid
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn ball(&self, id: usize) -> &Ball {
        &self.balls[id]
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn splitting(&self) -> bool {
        self.splitting
    }

    pub fn active(&self) -> impl Iterator<Item = &Ball> {
        self.balls.iter().filter(|b| b.active)
    }

    pub fn radius_at(&self, depth: u32) -> f64 {
        self.grid.metric.d_max / f64::powi(2.0, depth as i32)
    }

    /// Cell width, in grid units, of the bucket index at `depth`.
    fn cell_width(&self, depth: u32) -> f64 {
        self.radius_at(depth) * self.grid.intervals as f64
    }

    fn key(&self, idx: &[u32], depth: u32) -> CellKey {
        let w = self.cell_width(depth);
        idx.iter().map(|&i| (i as f64 / w).floor() as i64).collect()
    }

    /// Buckets adjacent to (and including) `key`.
    fn neighbours(key: &CellKey) -> Vec<CellKey> {
        let mut out = vec![CellKey::new()];
        for &k in key {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (-1..=1).map(move |o| {
                        let mut p = prefix.clone();
                        p.push(k + o);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn insert(&mut self, idx: Vec<u32>, depth: u32, q: f64, count: u64, parent: Option<usize>, episode: usize) -> usize {
        let id = self.balls.len();
        let coords: Vec<f64> = idx.iter().map(|&i| self.grid.coord(i)).collect();
        let (state, action) = coords.split_at(self.grid.state_dim);
        let state_key = self.key(&idx[..self.grid.state_dim], depth);
        let joint_key = self.key(&idx, depth);
        self.active_cols[depth as usize].entry(state_key).or_default().push(id);
        self.all_cells[depth as usize].entry(joint_key).or_default().push(id);
        self.balls.push(Ball {
            id,
            stage: self.stage,
            center: Point::new(state.to_vec(), action.to_vec()),
            center_index: idx,
            depth,
            radius: self.radius_at(depth),
            q_value: q,
            count,
            inherited: count,
            selections: 0,
            parent,
            children: Vec::new(),
            created_episode: episode,
            active: true,
        });
        id
    }

    fn deactivate(&mut self, id: usize) {
        let b = &self.balls[id];
        let key = self.key(&b.center_index[..self.grid.state_dim], b.depth);
        let depth = b.depth as usize;
        if let Some(v) = self.active_cols[depth].get_mut(&key) {
            v.retain(|&j| j != id);
            if v.is_empty() {
                self.active_cols[depth].remove(&key);
            }
        }
        self.balls[id].active = false;
    }

    /// Visits every grid point of the open ball around `center`.
    fn for_each_in_ball(&self, center: &[u32], radius: f64, mut f: impl FnMut(usize, &[u32])) {
        let bounds = self.grid.ball_box(center, radius);
        if self.grid.balls_are_boxes() {
            self.grid.for_each_in_box(&bounds, f);
        } else {
            self.grid.for_each_in_box(&bounds, |p, idx| {
                if self.grid.index_distance(center, idx) < radius {
                    f(p, idx);
                }
            });
        }
    }

    /// Raise the finest-depth marks of the points covered by ball `id`.
    fn paint(&mut self, id: usize) {
        let b = &self.balls[id];
        let mark = b.depth as u8 + 1;
        let mut touched = Vec::new();
        self.for_each_in_ball(&b.center_index, b.radius, |p, _| touched.push(p));
        for p in touched {
            if self.finest[p] < mark {
                self.finest[p] = mark;
            }
        }
    }

    /// Depth of the deepest active ball containing grid point `p`.
    pub fn finest_depth(&self, p: usize) -> Option<u32> {
        self.finest[p].checked_sub(1).map(u32::from)
    }

    /// Whether grid point `p` (a joint flat index) lies in `dom(B)`.
    pub fn in_domain_at(&self, id: usize, p: usize) -> bool {
        let b = &self.balls[id];
        if !b.active || self.finest[p] != b.depth as u8 + 1 {
            return false;
        }
        let idx = self.grid.unflatten(p, self.grid.dim());
        self.grid.index_distance(&b.center_index, &idx) < b.radius
    }

    /// Whether an arbitrary point lies in `dom(B)`: inside `B` and inside no
    /// active ball of strictly smaller radius.
    pub fn in_domain(&self, id: usize, p: &Point) -> bool {
        let b = &self.balls[id];
        let metric = &self.grid.metric;
        let inside = |c: &Ball| metric.split_distance(&p.state, &p.action, &c.center.state, &c.center.action) < c.radius;
        if !b.active || !inside(b) {
            return false;
        }
        let m = self.grid.intervals as f64;
        for depth in b.depth + 1..=self.max_depth {
            let w = self.cell_width(depth);
            let key: CellKey = p.state.iter().map(|&v| (v * m / w).floor() as i64).collect();
            for k in Self::neighbours(&key) {
                if let Some(ids) = self.active_cols[depth as usize].get(&k) {
                    if ids.iter().any(|&j| inside(&self.balls[j])) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Grid points of `dom(B)`, in grid order.
    pub fn domain_points(&self, id: usize) -> Vec<usize> {
        let b = &self.balls[id];
        if !b.active {
            return Vec::new();
        }
        let mark = b.depth as u8 + 1;
        let mut out = Vec::new();
        self.for_each_in_ball(&b.center_index, b.radius, |p, _| {
            if self.finest[p] == mark {
                out.push(p);
            }
        });
        out
    }

    /// Whether `dom(B)` meets the action fiber of grid state `s`.
    fn meets_fiber(&self, id: usize, s_idx: &[u32], s: usize, buf: &mut Vec<u32>) -> bool {
        let b = &self.balls[id];
        let sd = self.grid.state_dim;
        let mark = b.depth as u8 + 1;
        buf.clear();
        buf.extend_from_slice(s_idx);
        buf.extend_from_slice(&b.center_index[sd..]);
        if self.grid.index_distance(&b.center_index, buf) >= b.radius {
            // The center action is the closest one, so no action fits.
            return false;
        }
        let center_action = self.grid.flatten(&b.center_index[sd..]);
        if self.finest[self.grid.joint(s, center_action)] == mark {
            return true;
        }
        let bounds = self.grid.ball_box(&b.center_index[sd..], b.radius);
        self.grid.any_in_box(&bounds, |a, a_idx| {
            if self.finest[self.grid.joint(s, a)] != mark {
                return false;
            }
            buf.truncate(sd);
            buf.extend_from_slice(a_idx);
            self.grid.index_distance(&b.center_index, buf) < b.radius
        })
    }

    /// `rel(x)`: active balls whose domain meets `{x} x A` on the witness
    /// grid, for grid state `s`, sorted by id.
    pub fn relevant(&self, s: usize) -> Result<Vec<usize>> {
        let sd = self.grid.state_dim;
        let s_idx = self.grid.unflatten(s, sd);
        let mut buf = Vec::with_capacity(self.grid.dim());
        let mut out = Vec::new();
        for depth in 0..=self.max_depth {
            let cols = &self.active_cols[depth as usize];
            if cols.is_empty() {
                continue;
            }
            for k in Self::neighbours(&self.key(&s_idx, depth)) {
                if let Some(ids) = cols.get(&k) {
                    for &id in ids {
                        if self.meets_fiber(id, &s_idx, s, &mut buf) {
                            out.push(id);
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::invariant(format!(
                "stage {}: no relevant ball for grid state {s_idx:?}; the active domains do not cover its fiber",
                self.stage
            )));
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Reference implementation of [`relevant`](Self::relevant) that scans
    /// every grid action against every active ball, ignoring all cached
    /// geometry.
    pub fn relevant_exhaustive(&self, s: usize) -> Vec<usize> {
        let sd = self.grid.state_dim;
        let s_idx = self.grid.unflatten(s, sd);
        let active: Vec<&Ball> = self.active().collect();
        let mut hit = vec![false; self.balls.len()];
        for a in 0..self.grid.n_actions() {
            let mut idx = s_idx.clone();
            idx.extend(self.grid.unflatten(a, self.grid.action_dim));
            let containing: Vec<&Ball> = active
                .iter()
                .copied()
                .filter(|b| self.grid.index_distance(&b.center_index, &idx) < b.radius)
                .collect();
            if let Some(deepest) = containing.iter().map(|b| b.depth).max() {
                for b in containing.iter().filter(|b| b.depth == deepest) {
                    hit[b.id] = true;
                }
            }
        }
        (0..hit.len()).filter(|&i| hit[i]).collect()
    }

    /// Alg. 1 line 5: the relevant ball with the largest estimate.
    pub fn select_ball(&self, relevant: &[usize]) -> Result<usize> {
        let key = |id: usize| {
            let b = &self.balls[id];
            let depth = match self.tie_break {
                TieBreak::FinerFirst => b.depth,
                TieBreak::LowestId => 0,
            };
            (b.q_value, depth, std::cmp::Reverse(id))
        };
        relevant
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let (qa, da, ia) = key(a);
                let (qb, db, ib) = key(b);
                qa.total_cmp(&qb).then(da.cmp(&db)).then(ia.cmp(&ib))
            })
            .ok_or_else(|| Error::invariant(format!("stage {}: empty relevant set", self.stage)))
    }

    /// Grid actions `a` with `(s, a)` in `dom(B)`.
    pub fn domain_actions(&self, s: usize, id: usize) -> Vec<usize> {
        let b = &self.balls[id];
        let sd = self.grid.state_dim;
        let mark = b.depth as u8 + 1;
        let mut idx = self.grid.unflatten(s, sd);
        let bounds = self.grid.ball_box(&b.center_index[sd..], b.radius);
        let mut out = Vec::new();
        self.grid.for_each_in_box(&bounds, |a, a_idx| {
            if self.finest[self.grid.joint(s, a)] == mark {
                idx.truncate(sd);
                idx.extend_from_slice(a_idx);
                if self.grid.index_distance(&b.center_index, &idx) < b.radius {
                    out.push(a);
                }
            }
        });
        out
    }

    /// Alg. 1 line 6: the center action when `(x, a_center)` is in the
    /// domain, otherwise the in-domain grid action closest to the center
    /// (ties by action offset from the center, then by index).
    pub fn choose_action(&self, s: usize, id: usize) -> Result<usize> {
        let b = &self.balls[id];
        let sd = self.grid.state_dim;
        let center_action = self.grid.flatten(&b.center_index[sd..]);
        let candidates = self.domain_actions(s, id);
        if candidates.binary_search(&center_action).is_ok() {
            return Ok(center_action);
        }
        let s_idx = self.grid.unflatten(s, sd);
        let score = |a: usize| {
            let a_idx = self.grid.unflatten(a, self.grid.action_dim);
            let mut idx = s_idx.clone();
            idx.extend_from_slice(&a_idx);
            let d = self.grid.index_distance(&b.center_index, &idx);
            let off = a_idx
                .iter()
                .zip(&b.center_index[sd..])
                .map(|(&x, &c)| x.abs_diff(c))
                .max()
                .unwrap_or(0);
            (d, off, a)
        };
        candidates
            .into_iter()
            .map(score)
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)))
            .map(|t| t.2)
            .ok_or_else(|| {
                Error::invariant(format!(
                    "stage {}: ball {id} has no domain action at grid state {s_idx:?}",
                    self.stage
                ))
            })
    }

    /// Alg. 1 line 8: `min(H, max_{B in rel(x)} Q(B))`.
    pub fn estimate_value(&self, s: usize, horizon: usize) -> Result<f64> {
        let rel = self.relevant(s)?;
        let best = rel
            .iter()
            .map(|&id| self.balls[id].q_value)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(best.min(horizon as f64))
    }

    /// Record a selection of ball `id`; returns the new count `t`.
    pub fn record_visit(&mut self, id: usize) -> u64 {
        let b = &mut self.balls[id];
        b.count += 1;
        b.selections += 1;
        b.count
    }

    pub fn set_q(&mut self, id: usize, q: f64) {
        self.balls[id].q_value = q;
    }

    /// Split threshold `(d_max / r(B))^2 = 4^depth`.
    pub fn split_threshold(depth: u32) -> u64 {
        1u64 << (2 * depth)
    }

    /// Alg. 1 line 10 test. Balls at the depth cap never split.
    pub fn needs_split(&self, id: usize) -> bool {
        let b = &self.balls[id];
        self.splitting && b.active && b.depth < self.max_depth && b.count >= Self::split_threshold(b.depth)
    }

    /// Replace ball `id` by an `r/2`-net of its domain. The children have
    /// radius `r/2` and inherit the parent's count and estimate. Returns the
    /// child ids.
    pub fn split(&mut self, id: usize, episode: usize) -> Result<Vec<usize>> {
        let (depth, radius, q, count) = {
            let b = &self.balls[id];
            (b.depth, b.radius, b.q_value, b.count)
        };
        let mark = depth as u8 + 1;
        let mut domain = Vec::new();
        let mut in_ball = 0usize;
        self.for_each_in_ball(&self.balls[id].center_index, radius, |p, _| {
            in_ball += 1;
            if self.finest[p] == mark {
                domain.push(p);
            }
        });
        if domain.is_empty() {
            return Err(Error::invariant(format!(
                "stage {}: ball {id} was selected but has an empty domain",
                self.stage
            )));
        }
        // A domain that is the whole ball depends only on the ball, so its
        // net can be shared between stages and runs.
        let cache_key = (domain.len() == in_ball && depth <= NET_CACHE_DEPTH).then(|| NetKey {
            intervals: self.grid.intervals,
            state_dim: self.grid.state_dim,
            action_dim: self.grid.action_dim,
            kind: self.grid.metric.kind,
            d_max_bits: self.grid.metric.d_max.to_bits(),
            center: self.balls[id].center_index.clone(),
            depth,
        });
        let cached = cache_key.as_ref().and_then(|k| net_cache().lock().ok()?.get(k).cloned());
        let centers: Arc<Vec<usize>> = match cached {
            Some(c) => c,
            None => {
                let dim = self.grid.dim();
                let mut cloud = PointCloud::with_capacity(self.grid.state_dim, self.grid.action_dim, domain.len());
                let mut row = vec![0.0; dim];
                for &p in &domain {
                    let mut rest = p;
                    for k in (0..dim).rev() {
                        row[k] = self.grid.coord((rest % self.grid.side()) as u32);
                        rest /= self.grid.side();
                    }
                    cloud.push_row(&row);
                }
                let net = greedy_net(&cloud, radius / 2.0, &self.grid.metric)?;
                let c = Arc::new(net.into_iter().map(|i| domain[i]).collect::<Vec<_>>());
                if let (Some(k), Ok(mut cache)) = (cache_key, net_cache().lock()) {
                    cache.insert(k, c.clone());
                }
                c
            }
        };
        if centers.is_empty() {
            return Err(Error::invariant(format!(
                "stage {}: net of a non-empty domain came back empty",
                self.stage
            )));
        }
        let dim = self.grid.dim();
        self.deactivate(id);
        let mut children = Vec::with_capacity(centers.len());
        for &p in centers.iter() {
            let idx = self.grid.unflatten(p, dim);
            let child = self.insert(idx, depth + 1, q, count, Some(id), episode);
            self.paint(child);
            children.push(child);
        }
        self.balls[id].children = children.clone();

        if self.check != SplitCheck::Off {
            let child_mark = depth as u8 + 2;
            if let Some(&p) = domain.iter().find(|&&p| self.finest[p] < child_mark) {
                return Err(Error::invariant(format!(
                    "stage {}: children of ball {id} leave domain point {:?} uncovered",
                    self.stage,
                    self.grid.joint_coords(p)
                )));
            }
            for &c in &children {
                if let Some(other) = self.too_close(c) {
                    return Err(Error::invariant(format!(
                        "stage {}: balls {c} and {other} of radius {} have centers closer than their radius",
                        self.stage,
                        radius / 2.0
                    )));
                }
            }
        }
        Ok(children)
    }

    /// Some other ball of the same radius (active or not) whose center is
    /// within that radius of ball `id`'s center.
    fn too_close(&self, id: usize) -> Option<usize> {
        let b = &self.balls[id];
        let cells = &self.all_cells[b.depth as usize];
        for k in Self::neighbours(&self.key(&b.center_index, b.depth)) {
            if let Some(ids) = cells.get(&k) {
                for &j in ids {
                    if j != id && self.grid.index_distance(&b.center_index, &self.balls[j].center_index) < b.radius {
                        return Some(j);
                    }
                }
            }
        }
        None
    }

    /// From-scratch partition check on the witness grid: the active
    /// domains cover every grid point, and same-radius centers are at least
    /// one radius apart. Also cross-checks the cached finest depths.
    pub fn audit(&self) -> PartitionReport {
        let mut recount = vec![0u8; self.grid.len()];
        for b in self.active() {
            let mark = b.depth as u8 + 1;
            self.for_each_in_ball(&b.center_index, b.radius, |p, _| {
                if recount[p] < mark {
                    recount[p] = mark;
                }
            });
        }
        let mut report = PartitionReport {
            stage: self.stage,
            grid_points: self.grid.len(),
            ..Default::default()
        };
        for (p, (&fresh, &cached)) in recount.iter().zip(&self.finest).enumerate() {
            if fresh == 0 {
                report.uncovered += 1;
                if report.uncovered_sample.len() < 16 {
                    report.uncovered_sample.push(self.grid.joint_coords(p));
                }
            }
            if fresh != cached {
                report.stale_cells += 1;
            }
        }
        for b in &self.balls {
            let cells = &self.all_cells[b.depth as usize];
            for k in Self::neighbours(&self.key(&b.center_index, b.depth)) {
                if let Some(ids) = cells.get(&k) {
                    for &j in ids {
                        if j > b.id && self.grid.index_distance(&b.center_index, &self.balls[j].center_index) < b.radius {
                            report.separation.push((b.id, j));
                        }
                    }
                }
            }
        }
        report.separation.sort_unstable();
        report
    }

    /// Number of balls per depth, as `(all, active)`.
    pub fn depth_histogram(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.max_depth as usize + 1];
        for b in &self.balls {
            out[b.depth as usize].0 += 1;
            if b.active {
                out[b.depth as usize].1 += 1;
            }
        }
        out
    }
}
