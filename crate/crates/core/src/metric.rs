//! Metric structure on the joint state-action space.
//!
//! Points carry a state vector and an action vector, both living in the unit
//! box. Every metric kind offered here dominates each single-coordinate
//! difference (`D(p, q) >= |p_i - q_i|`), which is what lets the bucketed
//! net construction below prune by axis-aligned boxes.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A state-action pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
}

impl Point {
    pub fn new(state: Vec<f64>, action: Vec<f64>) -> Self {
        Point { state, action }
    }

    /// Shorthand for the one-dimensional state and action case.
    pub fn scalar(x: f64, a: f64) -> Self {
        Point {
            state: vec![x],
            action: vec![a],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.state.iter().chain(&self.action).all(|v| v.is_finite())
    }

    /// State coordinates followed by action coordinates.
    pub fn joint(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.state.len() + self.action.len());
        out.extend_from_slice(&self.state);
        out.extend_from_slice(&self.action);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// `max(|dx|_inf, |da|_inf)`
    ProductMax,
    /// `|dx|_inf + |da|_inf`
    ProductSum,
    /// Euclidean distance over all joint coordinates.
    EuclideanJoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    /// Diameter of the joint space under this metric.
    pub d_max: f64,
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl MetricSpec {
    pub fn new(kind: MetricKind, d_max: f64) -> Self {
        MetricSpec { kind, d_max }
    }

    /// The metric on the unit box `[0,1]^(state_dim + action_dim)` with its
    /// exact diameter.
    pub fn unit_box(kind: MetricKind, state_dim: usize, action_dim: usize) -> Self {
        let d_max = match kind {
            MetricKind::ProductMax => 1.0,
            MetricKind::ProductSum => 2.0,
            MetricKind::EuclideanJoint => ((state_dim + action_dim) as f64).sqrt(),
        };
        MetricSpec { kind, d_max }
    }

    /// Distance between two points, checking that their dimensions agree.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        if p.state.len() != q.state.len() || p.action.len() != q.action.len() {
            return Err(Error::invalid(format!(
                "dimension mismatch: ({}, {}) vs ({}, {})",
                p.state.len(),
                p.action.len(),
                q.state.len(),
                q.action.len()
            )));
        }
        Ok(self.split_distance(&p.state, &p.action, &q.state, &q.action))
    }

    /// Unchecked distance on separated state/action slices.
    #[inline]
    pub fn split_distance(&self, xs: &[f64], xa: &[f64], ys: &[f64], ya: &[f64]) -> f64 {
        match self.kind {
            MetricKind::ProductMax => linf(xs, ys).max(linf(xa, ya)),
            MetricKind::ProductSum => linf(xs, ys) + linf(xa, ya),
            MetricKind::EuclideanJoint => (sq(xs, ys) + sq(xa, ya)).sqrt(),
        }
    }

    /// Unchecked distance on joint coordinate rows (state first).
    #[inline]
    pub fn joint_distance(&self, p: &[f64], q: &[f64], state_dim: usize) -> f64 {
        let (ps, pa) = p.split_at(state_dim);
        let (qs, qa) = q.split_at(state_dim);
        self.split_distance(ps, pa, qs, qa)
    }

    /// The derived state metric `min_{a,a'} D((x,a),(x',a'))` evaluated over
    /// a finite action sample.
    pub fn state_distance(&self, x: &[f64], y: &[f64], actions: &[Vec<f64>]) -> Result<f64> {
        if actions.is_empty() {
            return Err(Error::invalid("state_distance needs a non-empty action sample"));
        }
        if x.len() != y.len() {
            return Err(Error::invalid("state dimension mismatch"));
        }
        let dim = actions[0].len();
        if actions.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("action sample has mixed dimensions"));
        }
        let mut best = f64::INFINITY;
        for a in actions {
            for b in actions {
                best = best.min(self.split_distance(x, a, y, b));
            }
        }
        Ok(best)
    }
}

/// A finite set of joint points stored row-major (state coordinates first).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    state_dim: usize,
    action_dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(state_dim: usize, action_dim: usize) -> Self {
        PointCloud {
            state_dim,
            action_dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(state_dim: usize, action_dim: usize, n: usize) -> Self {
        PointCloud {
            state_dim,
            action_dim,
            coords: Vec::with_capacity(n * (state_dim + action_dim)),
        }
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Ok(PointCloud::default());
        };
        let mut cloud = PointCloud::with_capacity(first.state.len(), first.action.len(), points.len());
        for p in points {
            cloud.push(p)?;
        }
        Ok(cloud)
    }

    /// One-dimensional state and action coordinates.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let mut cloud = PointCloud::with_capacity(1, 1, pairs.len());
        for &(x, a) in pairs {
            cloud.coords.push(x);
            cloud.coords.push(a);
        }
        cloud
    }

    pub fn push(&mut self, p: &Point) -> Result<()> {
        if self.is_empty() && self.state_dim == 0 && self.action_dim == 0 {
            self.state_dim = p.state.len();
            self.action_dim = p.action.len();
        }
        if p.state.len() != self.state_dim || p.action.len() != self.action_dim {
            return Err(Error::invalid("point dimension does not match the cloud"));
        }
        self.coords.extend_from_slice(&p.state);
        self.coords.extend_from_slice(&p.action);
        Ok(())
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.dim());
        self.coords.extend_from_slice(row);
    }

    pub fn dim(&self) -> usize {
        self.state_dim + self.action_dim
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn len(&self) -> usize {
        match self.dim() {
            0 => 0,
            d => self.coords.len() / d,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn point(&self, i: usize) -> Point {
        let row = self.row(i);
        Point::new(
            row[..self.state_dim].to_vec(),
            row[self.state_dim..].to_vec(),
        )
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        let d = self.dim().max(1);
        self.coords.chunks_exact(d)
    }

    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        let mut out = PointCloud::with_capacity(self.state_dim, self.action_dim, indices.len());
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }

    #[inline]
    pub fn dist(&self, spec: &MetricSpec, i: usize, j: usize) -> f64 {
        spec.joint_distance(self.row(i), self.row(j), self.state_dim)
    }
}

/// Largest pairwise distance; zero for empty and singleton sets.
pub fn diameter(points: &PointCloud, spec: &MetricSpec) -> f64 {
    let n = points.len();
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(points.dist(spec, i, j));
        }
    }
    best
}

/// Uniform bucket grid over a point cloud, stored in CSR form.
struct CellIndex {
    lo: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl CellIndex {
    fn build(cloud: &PointCloud, min_cell: f64) -> Self {
        let d = cloud.dim();
        let n = cloud.len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in cloud.rows() {
            for k in 0..d {
                lo[k] = lo[k].min(row[k]);
                hi[k] = hi[k].max(row[k]);
            }
        }
        let extent = lo
            .iter()
            .zip(&hi)
            .fold(0.0_f64, |acc, (l, h)| acc.max(h - l));
        // Keep the cell count within a small multiple of the point count.
        let per_axis = (4.0 * n as f64).powf(1.0 / d.max(1) as f64).max(1.0);
        let cell = min_cell.max(extent / per_axis).max(f64::MIN_POSITIVE);
        let shape: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| ((h - l) / cell).floor() as usize + 1)
            .collect();
        let ncells: usize = shape.iter().product();
        let mut counts = vec![0usize; ncells + 1];
        let mut cell_of = Vec::with_capacity(n);
        for row in cloud.rows() {
            let c = Self::flat(&lo, cell, &shape, row);
            counts[c + 1] += 1;
            cell_of.push(c);
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; n];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c]] = i;
            fill[c] += 1;
        }
        CellIndex {
            lo,
            cell,
            shape,
            offsets: counts,
            items,
        }
    }

    fn coord(lo: f64, cell: f64, len: usize, v: f64) -> usize {
        let c = ((v - lo) / cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(len - 1)
        }
    }

    fn flat(lo: &[f64], cell: f64, shape: &[usize], row: &[f64]) -> usize {
        let mut idx = 0;
        for k in 0..shape.len() {
            idx = idx * shape[k] + Self::coord(lo[k], cell, shape[k], row[k]);
        }
        idx
    }

    /// Calls `f` for every point whose cell meets the box `center +- radius`.
    fn for_each_near(&self, center: &[f64], radius: f64, mut f: impl FnMut(usize)) {
        let d = self.shape.len();
        let mut from = Vec::with_capacity(d);
        let mut to = Vec::with_capacity(d);
        for k in 0..d {
            from.push(Self::coord(self.lo[k], self.cell, self.shape[k], center[k] - radius));
            to.push(Self::coord(self.lo[k], self.cell, self.shape[k], center[k] + radius));
        }
        let mut cur = from.clone();
        loop {
            let mut flat = 0;
            for k in 0..d {
                flat = flat * self.shape[k] + cur[k];
            }
            for &i in &self.items[self.offsets[flat]..self.offsets[flat + 1]] {
                f(i);
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < to[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = from[k];
            }
        }
    }
}

#[derive(PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Farthest first; among equal distances the lowest index wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Farthest-point traversal seeded at the first point of `region`.
///
/// Returns indices into `region` forming an `r`-net: pairwise distances are
/// at least `r` and every region point lies strictly within `r` of some
/// returned point. Ties on the farthest distance go to the lowest index.
pub fn greedy_net(region: &PointCloud, r: f64, spec: &MetricSpec) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("net scale must be positive, got {r}")));
    }
    let n = region.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let index = CellIndex::build(region, r);
    let mut nearest = vec![f64::INFINITY; n];
    let mut net = vec![0usize];
    nearest[0] = 0.0;
    for (i, slot) in nearest.iter_mut().enumerate().skip(1) {
        *slot = region.dist(spec, 0, i);
    }
    let relax = |center: usize, radius: f64, nearest: &mut [f64], mut on_change: Option<&mut BinaryHeap<Candidate>>| {
        let c = region.row(center);
        index.for_each_near(c, radius, |j| {
            if nearest[j] > 0.0 {
                let dj = spec.joint_distance(c, region.row(j), region.state_dim());
                if dj < nearest[j] {
                    nearest[j] = dj;
                    if let Some(heap) = on_change.as_deref_mut() {
                        heap.push(Candidate { dist: dj, index: j });
                    }
                }
            }
        });
    };

    // Small nets (the common case when splitting a ball) are cheapest with
    // plain linear scans for the farthest point.
    while net.len() < SCAN_PHASE_LIMIT {
        let (mut best, mut next) = (f64::NEG_INFINITY, 0);
        for (i, &d) in nearest.iter().enumerate() {
            if d > best {
                best = d;
                next = i;
            }
        }
        if best < r {
            return Ok(net);
        }
        net.push(next);
        nearest[next] = 0.0;
        relax(next, best, &mut nearest, None);
    }

    // Large nets switch to a lazy max-heap. Both phases pick the farthest
    // point with the lowest index among ties, so the output is the same.
    let mut heap: BinaryHeap<Candidate> = nearest
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(index, &dist)| Candidate { dist, index })
        .collect();
    while let Some(Candidate { dist, index: next }) = heap.pop() {
        if dist != nearest[next] {
            continue;
        }
        if dist < r {
            break;
        }
        net.push(next);
        nearest[next] = 0.0;
        relax(next, dist, &mut nearest, Some(&mut heap));
    }
    Ok(net)
}

/// Net size at which [`greedy_net`] moves from linear scans to a heap.
const SCAN_PHASE_LIMIT: usize = 48;

/// Maximal `r`-packing built in input order: each point is kept when it is
/// at distance at least `r` from every point kept before it. On grids this
/// recovers the lattice packing, which farthest-point traversal misses
/// whenever `r` is not a dyadic fraction of the extent.
pub fn greedy_packing(region: &PointCloud, r: f64, spec: &MetricSpec) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("packing scale must be positive, got {r}")));
    }
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let key = |row: &[f64]| row.iter().map(|v| (v / r).floor() as i64).collect::<Vec<i64>>();
    let mut kept = Vec::new();
    for i in 0..region.len() {
        let row = region.row(i);
        let home = key(row);
        let mut probe = home.clone();
        let mut clear = true;
        // Every metric here dominates coordinate differences, so conflicts
        // live in the 3^d adjacent buckets.
        let d = home.len();
        let total = 3usize.pow(d as u32);
        'scan: for code in 0..total {
            let mut c = code;
            for k in 0..d {
                probe[k] = home[k] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(ids) = buckets.get(&probe) {
                for &j in ids {
                    if spec.joint_distance(row, region.row(j), region.state_dim()) < r {
                        clear = false;
                        break 'scan;
                    }
                }
            }
        }
        if clear {
            kept.push(i);
            buckets.entry(home).or_default().push(i);
        }
    }
    Ok(kept)
}

/// Result of a packing-number computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    /// Exact optimum in exact mode, otherwise the larger of two greedy
    /// (maximal) packings, which is a lower bound.
    pub count: usize,
    /// Whether `count` is the exact optimum.
    pub exact: bool,
    /// Upper bound: the size of a greedy `r/2`-net, since an `r`-packing
    /// holds at most one point per open `r/2`-ball. Equal to `count` in
    /// exact mode.
    pub upper: usize,
}

pub const DEFAULT_EXACT_THRESHOLD: usize = 25;

/// `r`-packing number of a finite region.
pub fn packing_number(
    region: &PointCloud,
    r: f64,
    spec: &MetricSpec,
    exact_threshold: usize,
) -> Result<Packing> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("packing scale must be positive, got {r}")));
    }
    let n = region.len();
    if n == 0 {
        return Ok(Packing {
            count: 0,
            exact: true,
            upper: 0,
        });
    }
    if n <= exact_threshold.min(64) {
        let count = max_packing_exact(region, r, spec);
        return Ok(Packing {
            count,
            exact: true,
            upper: count,
        });
    }
    // Both greedy constructions yield maximal packings; keep the larger.
    let lower = greedy_net(region, r, spec)?
        .len()
        .max(greedy_packing(region, r, spec)?.len());
    let upper = greedy_net(region, r / 2.0, spec)?.len();
    Ok(Packing {
        count: lower,
        exact: false,
        upper,
    })
}

/// Maximum independent set of the conflict graph `D(p, q) < r`.
fn max_packing_exact(region: &PointCloud, r: f64, spec: &MetricSpec) -> usize {
    let n = region.len();
    let mut conflict = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            if region.dist(spec, i, j) < r {
                conflict[i] |= 1 << j;
                conflict[j] |= 1 << i;
            }
        }
    }
    fn search(cands: u64, size: usize, best: &mut usize, conflict: &[u64]) {
        if cands == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cands.count_ones() as usize <= *best {
            return;
        }
        let v = cands.trailing_zeros() as usize;
        let rest = cands & !(1 << v);
        search(rest & !conflict[v], size + 1, best, conflict);
        // Excluding v only helps if one of its conflicting candidates can
        // then be taken instead.
        if rest & conflict[v] != 0 {
            search(rest, size, best, conflict);
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0;
    search(all, 0, &mut best, &conflict);
    best
}
