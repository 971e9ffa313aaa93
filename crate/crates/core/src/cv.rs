//! Leave-one-out cross-validation of the expansion cutoffs `(K, L)`.
//!
//! The criterion is `A²(K,L) − 2B(K,L)`, where `A²` is the squared norm of
//! the truncated expansion and `B` estimates its inner product with `√c`
//! using leave-one-out coefficients. Removing one point only changes the
//! nearest-neighbour distance of the points whose nearest neighbour it was,
//! so all leave-one-out tables follow from the full sums plus a few
//! corrections, and the whole score grid costs `O(n·Kmax·Lmax)`.

use crate::basis::BasisCache;
use crate::error::{Error, Result};
use crate::estimator::{nn_scale, CoefficientTable, EstimationInput};

/// Criterion values for every `(K, L)` with `K ≤ kmax`, `L ≤ lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    kmax: usize,
    lmax: usize,
    values: Vec<f64>,
}

impl ScoreGrid {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * (self.lmax + 1) + l]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.kmax, self.lmax)
    }

    /// Cells eligible for selection: the staircase
    /// `(min(j, kmax), min(j, lmax))` for `j = 1..=max(kmax, lmax)`, which is
    /// the diagonal `K = L` when the bounds agree. The cell `(0, 0)` is only
    /// a candidate when it is the whole grid.
    pub fn candidates(&self) -> Vec<(usize, usize)> {
        let top = self.kmax.max(self.lmax);
        let mut cells: Vec<(usize, usize)> = (top.min(1)..=top)
            .map(|j| (j.min(self.kmax), j.min(self.lmax)))
            .collect();
        cells.dedup();
        cells
    }

    /// Candidate minimising the criterion. Exact ties go to the smallest
    /// `K + L`, then the smallest `K`.
    pub fn argmin(&self) -> (usize, usize) {
        let mut cells = self.candidates();
        cells.sort_by_key(|&(k, l)| (k + l, k));
        let mut best = cells[0];
        for &(k, l) in &cells[1..] {
            if self.get(k, l) < self.get(best.0, best.1) {
                best = (k, l);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: (usize, usize),
    pub scores: ScoreGrid,
}

fn check_size(input: &EstimationInput) -> Result<()> {
    if input.len() < 3 {
        Err(Error::Size(format!(
            "cross-validation needs at least 3 points, got {}",
            input.len()
        )))
    } else {
        Ok(())
    }
}

/// Unscaled leave-one-out sums `Σ_{i'≠i} R̂^{(−i)}_{i'} w_{i'} b_k b_l` for
/// every excluded `i`, delivered one at a time to `visit`.
struct LooSums<'a> {
    input: &'a EstimationInput,
    cache: BasisCache,
    full: Vec<f64>,
    weighted: Vec<f64>,
    reverse: Vec<Vec<usize>>,
    width: usize,
}

impl<'a> LooSums<'a> {
    fn new(input: &'a EstimationInput, k: usize, l: usize) -> Result<Self> {
        let cache = BasisCache::new(input.basis_points(), k, l)?;
        let nb = input.neighbours();
        let w = input.weights();
        let weighted: Vec<f64> = (0..input.len())
            .map(|i| nb.first()[i] * w.map_or(1.0, |w| w[i]))
            .collect();
        let width = l + 1;
        let mut full = vec![0.0; (k + 1) * width];
        for (i, &r) in weighted.iter().enumerate() {
            accumulate(&mut full, r, cache.get(0, i), cache.get(1, i), width);
        }
        Ok(Self {
            input,
            cache,
            full,
            weighted,
            reverse: nb.reverse(),
            width,
        })
    }

    fn excluding(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.full);
        let c = &self.cache;
        accumulate(out, -self.weighted[i], c.get(0, i), c.get(1, i), self.width);
        let nb = self.input.neighbours();
        let w = self.input.weights();
        for &j in &self.reverse[i] {
            let delta = (nb.second()[j] - nb.first()[j]) * w.map_or(1.0, |w| w[j]);
            if delta != 0.0 {
                accumulate(out, delta, c.get(0, j), c.get(1, j), self.width);
            }
        }
    }
}

#[inline]
fn accumulate(out: &mut [f64], r: f64, bk: &[f64], bl: &[f64], width: usize) {
    for (a, &x) in bk.iter().enumerate() {
        let row = &mut out[a * width..(a + 1) * width];
        for (slot, &y) in row.iter_mut().zip(bl) {
            *slot += r * (x * y);
        }
    }
}

/// Leave-one-out coefficient table `β̂^{(−i)}_kl`, scaled by `2√(n−2)/(n−1)`.
pub fn loo_coefficients(
    input: &EstimationInput,
    excluded: usize,
    k: usize,
    l: usize,
) -> Result<CoefficientTable> {
    check_size(input)?;
    if excluded >= input.len() {
        return Err(Error::Size(format!("excluded index {excluded} out of range")));
    }
    let sums = LooSums::new(input, k, l)?;
    let mut buf = vec![0.0; sums.full.len()];
    sums.excluding(excluded, &mut buf);
    let c = nn_scale(input.len() - 1);
    let mut table = CoefficientTable::zeros(k, l);
    for a in 0..=k {
        for b in 0..=l {
            *table.get_mut(a, b) = c * buf[a * (l + 1) + b];
        }
    }
    Ok(table)
}

/// Per-cell terms `β̂²_kl` and `(2√(n−1)/n) Σᵢ R̂ᵢ wᵢ β̂^{(−i)}_kl b_k b_l`.
fn cell_terms(input: &EstimationInput, k: usize, l: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_size(input)?;
    let n = input.len();
    let sums = LooSums::new(input, k, l)?;
    let (c_full, c_loo) = (nn_scale(n), nn_scale(n - 1));
    let squares = sums.full.iter().map(|s| (c_full * s).powi(2)).collect();
    let mut cross = vec![0.0; sums.full.len()];
    let mut buf = vec![0.0; sums.full.len()];
    for i in 0..n {
        sums.excluding(i, &mut buf);
        let (bk, bl) = (sums.cache.get(0, i), sums.cache.get(1, i));
        let ri = sums.weighted[i];
        for (a, &x) in bk.iter().enumerate() {
            for (b, &y) in bl.iter().enumerate() {
                let idx = a * (l + 1) + b;
                cross[idx] += ri * buf[idx] * (x * y);
            }
        }
    }
    for v in cross.iter_mut() {
        *v *= c_full * c_loo;
    }
    Ok((squares, cross))
}

/// Criterion `A²(K,L) − 2B(K,L)` for a single cell.
pub fn cv_score(input: &EstimationInput, k: usize, l: usize) -> Result<f64> {
    let (squares, cross) = cell_terms(input, k, l)?;
    let a2: f64 = squares.iter().sum();
    let b: f64 = cross.iter().sum();
    Ok(a2 - 2.0 * b)
}

/// Criterion for every cell of the grid, from one pass of per-cell terms
/// and two-dimensional prefix sums.
pub fn cv_scores(input: &EstimationInput, kmax: usize, lmax: usize) -> Result<ScoreGrid> {
    let (squares, cross) = cell_terms(input, kmax, lmax)?;
    let w = lmax + 1;
    let mut values = vec![0.0; (kmax + 1) * w];
    for k in 0..=kmax {
        let mut row = 0.0;
        for l in 0..=lmax {
            row += squares[k * w + l] - 2.0 * cross[k * w + l];
            let above = if k > 0 { values[(k - 1) * w + l] } else { 0.0 };
            values[k * w + l] = above + row;
        }
    }
    Ok(ScoreGrid { kmax, lmax, values })
}

/// Scores the full grid `0..=kmax × 0..=lmax` and picks the best
/// [candidate](ScoreGrid::candidates).
pub fn select_cutoffs(input: &EstimationInput, kmax: usize, lmax: usize) -> Result<CvResult> {
    let scores = cv_scores(input, kmax, lmax)?;
    Ok(CvResult {
        best: scores.argmin(),
        scores,
    })
}
