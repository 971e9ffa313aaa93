//! Pseudo-observations and nearest-neighbour distances in the plane.
//!
//! Raw samples are reduced to their ranks, scaled into the open unit square,
//! and every downstream estimator only sees the Euclidean distance from each
//! point to its closest neighbour. Two search paths are provided: an `O(n²)`
//! scan kept as the reference, and a bucket grid with ring expansion that
//! returns bit-identical values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

/// `n` paired real observations.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    rows: Vec<Point>,
}

impl BivariateSample {
    pub fn new(rows: Vec<Point>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Size(format!(
                "a sample needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| !r[0].is_finite() || !r[1].is_finite()) {
            return Err(Error::Domain(format!("row {i} has a non-finite coordinate")));
        }
        Ok(Self { rows })
    }

    pub fn from_columns(x1: &[f64], x2: &[f64]) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::Size(format!(
                "column lengths differ: {} vs {}",
                x1.len(),
                x2.len()
            )));
        }
        Self::new(x1.iter().zip(x2).map(|(&a, &b)| [a, b]).collect())
    }

    pub fn rows(&self) -> &[Point] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// The same sample with the two variables exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            rows: self.rows.iter().map(|r| [r[1], r[0]]).collect(),
        }
    }

    /// Applies a map to each column independently.
    pub fn map_columns(&self, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.rows.iter().map(|r| [f1(r[0]), f2(r[1])]).collect())
    }
}

/// How tied values within a column are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ties keep their input order.
    #[default]
    Stable,
    /// A seeded perturbation of magnitude `1e-10 × column range` is added
    /// before ranking.
    Jitter { seed: u64 },
}

/// Rank-based surrogates of the copula sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObs {
    points: Vec<Point>,
    ranks: Vec<[usize; 2]>,
    tie_warning: bool,
}

impl PseudoObs {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// One-based ranks; each column is a permutation of `1..=n`.
    pub fn ranks(&self) -> &[[usize; 2]] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when some column contained tied values.
    pub fn tie_warning(&self) -> bool {
        self.tie_warning
    }
}

/// Pseudo-observations with the default (stable) tie policy.
pub fn pseudo_observations(sample: &BivariateSample) -> Result<PseudoObs> {
    pseudo_observations_with(sample, TiePolicy::Stable)
}

pub fn pseudo_observations_with(sample: &BivariateSample, ties: TiePolicy) -> Result<PseudoObs> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 rows, got {n}")));
    }
    let mut columns = [sample.column(0), sample.column(1)];
    if let TiePolicy::Jitter { seed } = ties {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for col in columns.iter_mut() {
            let (lo, hi) = col
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let scale = 1e-10 * (hi - lo);
            for v in col.iter_mut() {
                *v += scale * (rng.random::<f64>() - 0.5);
            }
        }
    }

    let mut ranks = vec![[0usize; 2]; n];
    let mut tie_warning = false;
    for (k, col) in columns.iter().enumerate() {
        let mut order: Vec<usize> = (0..n).collect();
        // stable sort: equal values keep input order
        order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("finite values"));
        tie_warning |= order.windows(2).any(|w| col[w[0]] == col[w[1]]);
        for (pos, &i) in order.iter().enumerate() {
            ranks[i][k] = pos + 1;
        }
    }
    let scale = (n + 1) as f64;
    let points = ranks
        .iter()
        .map(|r| [r[0] as f64 / scale, r[1] as f64 / scale])
        .collect();
    Ok(PseudoObs {
        points,
        ranks,
        tie_warning,
    })
}

/// Nearest-neighbour distances, one per point.
#[derive(Debug, Clone, PartialEq)]
pub struct NnDistances {
    values: Vec<f64>,
}

impl NnDistances {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[inline]
fn dist(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// First and second nearest-neighbour distances of every point, plus the
/// index attaining the first. Enough to answer any single-exclusion query.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourTable {
    nearest: Vec<usize>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl NeighbourTable {
    /// Builds the table with the bucket-grid search. Needs at least 2 points;
    /// with exactly 2 the second distance is `+inf`.
    pub fn build(points: &[Point]) -> Result<Self> {
        check_len(points, 2)?;
        let grid = Grid::new(points);
        let n = points.len();
        let mut nearest = Vec::with_capacity(n);
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for i in 0..n {
            let best = grid.two_nearest(points, i);
            nearest.push(best.idx);
            first.push(best.d1);
            second.push(best.d2);
        }
        Ok(Self {
            nearest,
            first,
            second,
        })
    }

    /// Same table by exhaustive scan.
    pub fn build_brute(points: &[Point]) -> Result<Self> {
        check_len(points, 2)?;
        let n = points.len();
        let mut table = Self {
            nearest: vec![0; n],
            first: vec![f64::INFINITY; n],
            second: vec![f64::INFINITY; n],
        };
        for i in 0..n {
            let mut best = TwoBest::new();
            for j in (0..n).filter(|&j| j != i) {
                best.offer(j, dist(&points[i], &points[j]));
            }
            table.nearest[i] = best.idx;
            table.first[i] = best.d1;
            table.second[i] = best.d2;
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn nearest(&self) -> &[usize] {
        &self.nearest
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn distances(&self) -> NnDistances {
        NnDistances::new(self.first.clone())
    }

    /// Distance from `i` to its nearest neighbour once `excluded` is removed.
    #[inline]
    pub fn distance_without(&self, i: usize, excluded: usize) -> f64 {
        if self.nearest[i] == excluded {
            self.second[i]
        } else {
            self.first[i]
        }
    }

    /// For every point `j`, the points whose recorded nearest neighbour is `j`.
    pub fn reverse(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.len()];
        for (i, &j) in self.nearest.iter().enumerate() {
            rev[j].push(i);
        }
        rev
    }
}

fn check_len(points: &[Point], min: usize) -> Result<()> {
    if points.len() < min {
        Err(Error::Size(format!(
            "need at least {min} points, got {}",
            points.len()
        )))
    } else {
        Ok(())
    }
}

/// Exact nearest-neighbour distances, grid-accelerated.
pub fn nn_distances(points: &[Point]) -> Result<NnDistances> {
    check_len(points, 2)?;
    let grid = Grid::new(points);
    Ok(NnDistances::new(
        (0..points.len()).map(|i| grid.nearest(points, i)).collect(),
    ))
}

/// Reference `O(n²)` implementation of [`nn_distances`].
pub fn nn_distances_brute(points: &[Point]) -> Result<NnDistances> {
    check_len(points, 2)?;
    let n = points.len();
    let values = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist(&points[i], &points[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(NnDistances::new(values))
}

/// Nearest-neighbour distances among the `n − 1` points left after removing
/// `excluded`, in input order with the excluded index skipped.
pub fn loo_nn_distances(points: &[Point], excluded: usize) -> Result<NnDistances> {
    check_len(points, 3)?;
    check_index(points, excluded)?;
    let table = NeighbourTable::build(points)?;
    Ok(NnDistances::new(
        (0..points.len())
            .filter(|&i| i != excluded)
            .map(|i| table.distance_without(i, excluded))
            .collect(),
    ))
}

/// Reference implementation of [`loo_nn_distances`]: brute force on the
/// reduced set.
pub fn loo_nn_distances_brute(points: &[Point], excluded: usize) -> Result<NnDistances> {
    check_len(points, 3)?;
    check_index(points, excluded)?;
    let reduced: Vec<Point> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != excluded)
        .map(|(_, p)| *p)
        .collect();
    nn_distances_brute(&reduced)
}

fn check_index(points: &[Point], excluded: usize) -> Result<()> {
    if excluded >= points.len() {
        Err(Error::Size(format!(
            "excluded index {excluded} out of range for {} points",
            points.len()
        )))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct TwoBest {
    idx: usize,
    d1: f64,
    d2: f64,
}

impl TwoBest {
    fn new() -> Self {
        Self {
            idx: usize::MAX,
            d1: f64::INFINITY,
            d2: f64::INFINITY,
        }
    }

    #[inline]
    fn offer(&mut self, j: usize, d: f64) {
        if d < self.d1 {
            self.d2 = self.d1;
            self.d1 = d;
            self.idx = j;
        } else if d < self.d2 {
            self.d2 = d;
        }
    }
}

/// Square buckets of side about `extent / ⌈√n⌉`, stored in CSR layout.
struct Grid {
    origin: Point,
    inv_side: f64,
    side: f64,
    cells: usize,
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl Grid {
    fn new(points: &[Point]) -> Self {
        let n = points.len();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cells = ((n as f64).sqrt().ceil() as usize).max(1);
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let side = if extent > 0.0 { extent / cells as f64 } else { 1.0 };
        let mut grid = Self {
            origin: lo,
            inv_side: 1.0 / side,
            side,
            cells,
            starts: vec![0; cells * cells + 1],
            items: vec![0; n],
        };
        let ids: Vec<usize> = points.iter().map(|p| grid.cell_id(p)).collect();
        for &c in &ids {
            grid.starts[c + 1] += 1;
        }
        for c in 0..cells * cells {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in ids.iter().enumerate() {
            grid.items[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    #[inline]
    fn coord(&self, v: f64, k: usize) -> usize {
        let c = ((v - self.origin[k]) * self.inv_side).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.cells - 1)
        }
    }

    #[inline]
    fn cell_id(&self, p: &Point) -> usize {
        self.coord(p[1], 1) * self.cells + self.coord(p[0], 0)
    }

    /// Visits all cells at Chebyshev ring distance exactly `r` from
    /// `(cx, cy)`, clipped to the grid.
    fn for_ring(&self, cx: usize, cy: usize, r: usize, mut visit: impl FnMut(usize)) {
        let (cx, cy, r) = (cx as isize, cy as isize, r as isize);
        let m = self.cells as isize;
        let x0 = (cx - r).max(0);
        let x1 = (cx + r).min(m - 1);
        let y0 = (cy - r).max(0);
        let y1 = (cy + r).min(m - 1);
        for y in y0..=y1 {
            let on_edge_row = y == cy - r || y == cy + r;
            if on_edge_row {
                for x in x0..=x1 {
                    self.visit_cell(x, y, &mut visit);
                }
            } else {
                if cx - r >= 0 {
                    self.visit_cell(cx - r, y, &mut visit);
                }
                if r > 0 && cx + r < m {
                    self.visit_cell(cx + r, y, &mut visit);
                }
            }
        }
    }

    #[inline]
    fn visit_cell(&self, x: isize, y: isize, visit: &mut impl FnMut(usize)) {
        let c = y as usize * self.cells + x as usize;
        for &j in &self.items[self.starts[c]..self.starts[c + 1]] {
            visit(j);
        }
    }

    /// Lower bound on the distance to any point outside rings `0..=r`.
    /// Slightly conservative to absorb rounding in the bucket assignment.
    #[inline]
    fn ring_bound(&self, r: usize) -> f64 {
        (r as f64 - 1e-6) * self.side
    }

    fn two_nearest(&self, points: &[Point], i: usize) -> TwoBest {
        let p = &points[i];
        let (cx, cy) = (self.coord(p[0], 0), self.coord(p[1], 1));
        let mut best = TwoBest::new();
        for r in 0..=self.cells {
            self.for_ring(cx, cy, r, |j| {
                if j != i {
                    best.offer(j, dist(p, &points[j]));
                }
            });
            if best.d2 <= self.ring_bound(r) {
                break;
            }
        }
        best
    }

    fn nearest(&self, points: &[Point], i: usize) -> f64 {
        let p = &points[i];
        let (cx, cy) = (self.coord(p[0], 0), self.coord(p[1], 1));
        let mut d1 = f64::INFINITY;
        for r in 0..=self.cells {
            self.for_ring(cx, cy, r, |j| {
                if j != i {
                    d1 = d1.min(dist(p, &points[j]));
                }
            });
            if d1 <= self.ring_bound(r) {
                break;
            }
        }
        d1
    }
}
