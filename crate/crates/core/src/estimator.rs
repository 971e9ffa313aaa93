//! Nearest-neighbour estimation of the Bhattacharyya affinity and the
//! Hellinger correlation.
//!
//! The affinity `B = ∬ √c` of the copula density `c` with the independence
//! copula is estimated by `(2√(n−1)/n) Σ R̂ᵢ`, where `R̂ᵢ` is the distance
//! from pseudo-observation `i` to its nearest neighbour. The same device
//! estimates every coefficient of `√c` in a tensorised Legendre basis;
//! dividing the constant coefficient by the norm of the truncated expansion
//! shrinks the estimate into `[0, 1]`. The Hellinger correlation is the
//! affinity mapped through the inverse of the Gaussian calibration curve, so
//! that it equals `|ρ|` for bivariate normal data.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisCache, MAX_DEGREE};
use crate::cv;
use crate::error::{Error, Result};
use crate::ranks_nn::{
    pseudo_observations_with, BivariateSample, NeighbourTable, NnDistances, Point, PseudoObs,
    TiePolicy,
};
use crate::transform;

/// Estimated series coefficients `β̂_kl` for `0 ≤ k ≤ K`, `0 ≤ l ≤ L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    k: usize,
    l: usize,
    values: Vec<f64>,
}

impl CoefficientTable {
    /// Zero table with cutoffs `(k, l)`.
    pub fn zeros(k: usize, l: usize) -> Self {
        Self {
            k,
            l,
            values: vec![0.0; (k + 1) * (l + 1)],
        }
    }

    /// Builds a table from rows indexed `[k][l]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Size("coefficient rows must be non-empty and equal length".into()));
        }
        Ok(Self {
            k: rows.len() - 1,
            l: width - 1,
            values: rows.concat(),
        })
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.k, self.l)
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * (self.l + 1) + l]
    }

    #[inline]
    pub(crate) fn get_mut(&mut self, k: usize, l: usize) -> &mut f64 {
        &mut self.values[k * (self.l + 1) + l]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.l, self.k);
        for k in 0..=self.k {
            for l in 0..=self.l {
                *t.get_mut(l, k) = self.get(k, l);
            }
        }
        t
    }

    /// `Σ β̂²_kl`, accumulated over the unordered index pairs `{k, l}` so
    /// that a table and its transpose give bit-identical sums.
    pub fn sum_of_squares(&self) -> f64 {
        let sq = |a: usize, b: usize| -> f64 {
            if a <= self.k && b <= self.l {
                self.get(a, b).powi(2)
            } else {
                0.0
            }
        };
        let top = self.k.max(self.l);
        let mut total = 0.0;
        for lo in 0..=top {
            total += sq(lo, lo);
            for hi in lo + 1..=top {
                total += sq(lo, hi) + sq(hi, lo);
            }
        }
        total
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `2√(n−1)/n`, the scaling that turns summed nearest-neighbour distances
/// into an affinity estimate.
#[inline]
pub(crate) fn nn_scale(n: usize) -> f64 {
    2.0 * ((n - 1) as f64).sqrt() / n as f64
}

fn check_weights(n: usize, weights: Option<&[f64]>) -> Result<()> {
    match weights {
        Some(w) if w.len() != n => Err(Error::Size(format!(
            "{} weights supplied for {n} points",
            w.len()
        ))),
        _ => Ok(()),
    }
}

#[inline]
pub(crate) fn weighted(nn: &[f64], weights: Option<&[f64]>, i: usize) -> f64 {
    match weights {
        Some(w) => nn[i] * w[i],
        None => nn[i],
    }
}

/// Raw affinity estimate `(2√(n−1)/n) Σ R̂ᵢ wᵢ`.
pub fn b_hat_raw(nn: &NnDistances, weights: Option<&[f64]>) -> Result<f64> {
    let n = nn.len();
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 distances, got {n}")));
    }
    check_weights(n, weights)?;
    let d = nn.values();
    let total: f64 = (0..n).map(|i| weighted(d, weights, i)).sum();
    Ok((nn_scale(n) * total).max(0.0))
}

/// Coefficient table `β̂_kl = (2√(n−1)/n) Σ R̂ᵢ wᵢ b_k(Ûᵢ₁) b_l(Ûᵢ₂)`.
///
/// `points` are where the basis is evaluated (the pseudo-observations); the
/// distances may come from a transformed copy of them.
pub fn beta_hat_table(
    points: &[Point],
    nn: &NnDistances,
    k: usize,
    l: usize,
    weights: Option<&[f64]>,
) -> Result<CoefficientTable> {
    let n = points.len();
    if n < 2 || nn.len() != n {
        return Err(Error::Size(format!(
            "{n} points with {} distances",
            nn.len()
        )));
    }
    check_weights(n, weights)?;
    let cache = BasisCache::new(points, k, l)?;
    let mut table = CoefficientTable::zeros(k, l);
    let d = nn.values();
    for i in 0..n {
        let r = weighted(d, weights, i);
        let (bk, bl) = (cache.get(0, i), cache.get(1, i));
        for (a, &x) in bk.iter().enumerate() {
            for (b, &y) in bl.iter().enumerate() {
                *table.get_mut(a, b) += r * (x * y);
            }
        }
    }
    let c = nn_scale(n);
    for v in table.values.iter_mut() {
        *v *= c;
    }
    // b_0 ≡ 1, so this entry must coincide with the raw estimate
    *table.get_mut(0, 0) = b_hat_raw(nn, weights)?;
    Ok(table)
}

/// Shrunk affinity `β̂₀₀ / ‖β̂‖_F`, always in `[0, 1]`.
pub fn normalize_b(table: &CoefficientTable) -> Result<f64> {
    let norm = table.sum_of_squares().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::DegenerateData(
            "all estimated coefficients are zero".into(),
        ));
    }
    Ok((table.get(0, 0).max(0.0) / norm).min(1.0))
}

/// Hellinger correlation as a function of the affinity,
/// `η = (2/B²){B⁴ + (4 − 3B⁴)^{1/2} − 2}^{1/2}`.
///
/// Evaluated in the algebraically equivalent form `2√((s − 1)/(s + 2))` with
/// `s = √(4 − 3B⁴)`, which has no cancellation near `B = 0`.
pub fn eta_from_b(b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("affinity {b} outside [0, 1]")));
    }
    if b == 1.0 {
        return Ok(0.0);
    }
    let b4 = (b * b) * (b * b);
    let s = (4.0 - 3.0 * b4).sqrt();
    Ok((2.0 * ((s - 1.0) / (s + 2.0)).sqrt()).clamp(0.0, 1.0))
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("correlation {rho} must satisfy |ρ| < 1")))
    }
}

/// Squared Hellinger distance between a bivariate normal copula with
/// correlation `rho` and independence: `1 − 2(1−ρ²)^{1/4}/(4−ρ²)^{1/2}`.
pub fn gaussian_h2(rho: f64) -> Result<f64> {
    Ok(1.0 - gaussian_b(rho)?)
}

/// Affinity of the Gaussian copula, `2(1−ρ²)^{1/4}/(4−ρ²)^{1/2}`.
pub fn gaussian_b(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let r2 = rho * rho;
    Ok(2.0 * (1.0 - r2).sqrt().sqrt() / (4.0 - r2).sqrt())
}

/// Product-moment correlation.
pub fn pearson(sample: &BivariateSample) -> Result<f64> {
    let rows = sample.rows();
    let n = rows.len() as f64;
    let (m1, m2) = rows
        .iter()
        .fold((0.0, 0.0), |(a, b), r| (a + r[0], b + r[1]));
    let (m1, m2) = (m1 / n, m2 / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for r in rows {
        let (dx, dy) = (r[0] - m1, r[1] - m2);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateData("a column has zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Which marginal transform is applied before measuring distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    None,
    #[default]
    Beta66,
}

/// How the expansion cutoffs are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Cutoffs {
    Fixed { k: usize, l: usize },
    CrossValidated { kmax: usize, lmax: usize },
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs::CrossValidated { kmax: 5, lmax: 5 }
    }
}

/// Pipeline configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub cutoffs: Cutoffs,
    pub transform: TransformKind,
    pub ties: TiePolicy,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = match self.cutoffs {
            Cutoffs::Fixed { k, l } => (k, l),
            Cutoffs::CrossValidated { kmax, lmax } => (kmax, lmax),
        };
        if a > MAX_DEGREE || b > MAX_DEGREE {
            return Err(Error::Capability(format!(
                "cutoffs ({a}, {b}) exceed the basis maximum {MAX_DEGREE}"
            )));
        }
        Ok(())
    }

    /// Canonical one-line description, used for cache keys.
    pub fn canonical(&self) -> String {
        let cut = match self.cutoffs {
            Cutoffs::Fixed { k, l } => format!("fixed:{k}:{l}"),
            Cutoffs::CrossValidated { kmax, lmax } => format!("cv:{kmax}:{lmax}"),
        };
        let tr = match self.transform {
            TransformKind::None => "none",
            TransformKind::Beta66 => "beta66",
        };
        let ties = match self.ties {
            TiePolicy::Stable => "stable".to_string(),
            TiePolicy::Jitter { seed } => format!("jitter:{seed}"),
        };
        format!("cutoffs={cut};transform={tr};ties={ties}")
    }

    /// Inverse of [`canonical`](Self::canonical).
    pub fn from_canonical(text: &str) -> Result<Self> {
        let bad = || Error::Format(format!("malformed configuration '{text}'"));
        let mut fields = [None; 3];
        for part in text.trim().split(';') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let slot = match key {
                "cutoffs" => 0,
                "transform" => 1,
                "ties" => 2,
                _ => return Err(bad()),
            };
            fields[slot] = Some(value);
        }
        let [Some(cut), Some(tr), Some(ties)] = fields else {
            return Err(bad());
        };
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let cutoffs = match cut.split(':').collect::<Vec<_>>()[..] {
            ["fixed", k, l] => Cutoffs::Fixed { k: num(k)?, l: num(l)? },
            ["cv", k, l] => Cutoffs::CrossValidated { kmax: num(k)?, lmax: num(l)? },
            _ => return Err(bad()),
        };
        let transform = match tr {
            "none" => TransformKind::None,
            "beta66" => TransformKind::Beta66,
            _ => return Err(bad()),
        };
        let ties = match ties.split_once(':') {
            None if ties == "stable" => TiePolicy::Stable,
            Some(("jitter", seed)) => TiePolicy::Jitter {
                seed: seed.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(Self { cutoffs, transform, ties })
    }
}

/// Output of [`estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub b_raw: f64,
    pub b_normalized: f64,
    pub eta: f64,
    pub cutoffs: (usize, usize),
    pub transform_used: TransformKind,
    pub tie_warning: bool,
    /// Set when the cutoffs are `(0, 0)`: no shrinkage is possible and
    /// `eta` is computed from `min(b_raw, 1)`.
    pub raw_mode: bool,
}

/// Everything the coefficient and cross-validation computations need: where
/// to evaluate the basis, the neighbour structure of the points whose
/// distances are measured, and optional per-point weights.
#[derive(Debug, Clone)]
pub struct EstimationInput {
    basis_points: Vec<Point>,
    neighbours: NeighbourTable,
    weights: Option<Vec<f64>>,
}

impl EstimationInput {
    pub fn new(pseudo: &PseudoObs, kind: TransformKind) -> Result<Self> {
        match kind {
            TransformKind::None => Self::from_parts(pseudo.points().to_vec(), pseudo.points(), None),
            TransformKind::Beta66 => {
                let t = transform::transform_points(pseudo)?;
                Self::from_parts(pseudo.points().to_vec(), t.points(), Some(t.weights().to_vec()))
            }
        }
    }

    pub fn from_parts(
        basis_points: Vec<Point>,
        distance_points: &[Point],
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if basis_points.len() != distance_points.len() {
            return Err(Error::Size("point sets differ in length".into()));
        }
        check_weights(basis_points.len(), weights.as_deref())?;
        Ok(Self {
            neighbours: NeighbourTable::build(distance_points)?,
            basis_points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.basis_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis_points.is_empty()
    }

    pub fn basis_points(&self) -> &[Point] {
        &self.basis_points
    }

    pub fn neighbours(&self) -> &NeighbourTable {
        &self.neighbours
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn distances(&self) -> NnDistances {
        self.neighbours.distances()
    }

    pub fn table(&self, k: usize, l: usize) -> Result<CoefficientTable> {
        beta_hat_table(&self.basis_points, &self.distances(), k, l, self.weights())
    }
}

/// Full pipeline: ranks, optional transform, distances, cutoff selection,
/// coefficient table, shrinkage and calibration.
pub fn estimate(sample: &BivariateSample, config: &EstimatorConfig) -> Result<EstimateResult> {
    config.validate()?;
    let pseudo = pseudo_observations_with(sample, config.ties)?;
    estimate_pseudo(&pseudo, config)
}

pub fn estimate_pseudo(pseudo: &PseudoObs, config: &EstimatorConfig) -> Result<EstimateResult> {
    config.validate()?;
    let input = EstimationInput::new(pseudo, config.transform)?;
    let (k, l) = match config.cutoffs {
        Cutoffs::Fixed { k, l } => (k, l),
        Cutoffs::CrossValidated { kmax, lmax } => cv::select_cutoffs(&input, kmax, lmax)?.best,
    };
    let table = input.table(k, l)?;
    let b_raw = table.get(0, 0);
    let raw_mode = (k, l) == (0, 0);
    let b_normalized = if raw_mode {
        b_raw.min(1.0)
    } else {
        normalize_b(&table)?
    };
    Ok(EstimateResult {
        b_raw,
        b_normalized,
        eta: eta_from_b(b_normalized)?,
        cutoffs: (k, l),
        transform_used: config.transform,
        tie_warning: pseudo.tie_warning(),
        raw_mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks_nn::{nn_distances, pseudo_observations};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn raw_estimate_by_hand() {
        let nn = NnDistances::new(vec![0.5f64.sqrt(); 2]);
        assert!(close(b_hat_raw(&nn, None).unwrap(), 2.0 * 0.5f64.sqrt(), 1e-15));
        assert_eq!(b_hat_raw(&NnDistances::new(vec![0.0; 4]), None).unwrap(), 0.0);
        let nn = NnDistances::new(vec![0.1, 0.1, 1.13f64.sqrt()]);
        let expected = 2.0 * 2f64.sqrt() / 3.0 * (0.2 + 1.13f64.sqrt());
        assert!(close(b_hat_raw(&nn, None).unwrap(), expected, 1e-15));
        assert!(close(expected, 1.19078, 1e-5));
        assert!(matches!(b_hat_raw(&nn, Some(&[1.0, 1.0])), Err(Error::Size(_))));
    }

    #[test]
    fn normalization_by_hand() {
        let t = CoefficientTable::from_rows(&[vec![0.8, 0.0], vec![0.0, 0.6]]).unwrap();
        assert!(close(normalize_b(&t).unwrap(), 0.8, 1e-15));
        let one = CoefficientTable::from_rows(&[vec![0.37]]).unwrap();
        assert_eq!(normalize_b(&one).unwrap(), 1.0);
        let scaled = CoefficientTable::from_rows(&[vec![0.8 * 3.5, 0.1 * 3.5], vec![-0.2 * 3.5, 0.6 * 3.5]]).unwrap();
        let base = CoefficientTable::from_rows(&[vec![0.8, 0.1], vec![-0.2, 0.6]]).unwrap();
        assert!(close(normalize_b(&scaled).unwrap(), normalize_b(&base).unwrap(), 1e-15));
        let zero = CoefficientTable::zeros(1, 1);
        assert!(matches!(normalize_b(&zero), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn eta_endpoints() {
        assert_eq!(eta_from_b(1.0).unwrap(), 0.0);
        assert!(close(eta_from_b(0.0).unwrap(), 1.0, 1e-15));
        assert!(close(eta_from_b(1e-4).unwrap(), 1.0, 1e-12));
        assert!(matches!(eta_from_b(1.01), Err(Error::Domain(_))));
        assert!(matches!(eta_from_b(-0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn eta_agrees_with_direct_formula_away_from_zero() {
        for i in 50..=1000 {
            let b = i as f64 / 1000.0;
            let b2 = b * b;
            let direct = (2.0 / b2) * (b2 * b2 + (4.0 - 3.0 * b2 * b2).sqrt() - 2.0).max(0.0).sqrt();
            // the direct form loses about eps / B⁴ to cancellation
            let tol = 1e-13 + 1e-15 / (b2 * b2);
            assert!(close(eta_from_b(b).unwrap(), direct, tol), "B = {b}");
        }
    }

    #[test]
    fn eta_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let e = eta_from_b(i as f64 / 1000.0).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn gaussian_closed_forms() {
        assert_eq!(gaussian_h2(0.0).unwrap(), 0.0);
        assert_eq!(gaussian_b(0.0).unwrap(), 1.0);
        let b = 2.0 * 0.36f64.powf(0.25) / 3.36f64.sqrt();
        assert!(close(gaussian_b(0.8).unwrap(), b, 1e-15));
        assert!(close(gaussian_h2(0.8).unwrap(), 1.0 - b, 1e-15));
        assert!(matches!(gaussian_b(1.0), Err(Error::Domain(_))));
        assert!(matches!(gaussian_h2(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_round_trip() {
        for rho in [0.1, 0.4, 0.8, 0.99, -0.1, -0.4, -0.8, -0.99] {
            let eta = eta_from_b(gaussian_b(rho).unwrap()).unwrap();
            assert!(close(eta, f64::abs(rho), 1e-10), "rho = {rho}: {eta}");
        }
    }

    #[test]
    fn pearson_basics() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let s = BivariateSample::from_columns(&x, &y).unwrap();
        assert!(close(pearson(&s).unwrap(), 1.0, 1e-14));
        let ny: Vec<f64> = x.iter().map(|v| -v).collect();
        let s = BivariateSample::from_columns(&x, &ny).unwrap();
        assert!(close(pearson(&s).unwrap(), -1.0, 1e-14));
        let s = BivariateSample::from_columns(&x, &[1.0; 10]).unwrap();
        assert!(matches!(pearson(&s), Err(Error::DegenerateData(_))));
    }

    fn fixed_sample() -> BivariateSample {
        // 20 points from a deterministic quasi-random pattern
        let rows = (0..20)
            .map(|i| {
                let a = (i as f64 * 0.618_033_988_75).fract();
                let b = (i as f64 * 0.414_213_562_37 + 0.3 * a).fract();
                [a, b]
            })
            .collect();
        BivariateSample::new(rows).unwrap()
    }

    #[test]
    fn table_corner_is_raw_estimate() {
        let p = pseudo_observations(&fixed_sample()).unwrap();
        let nn = nn_distances(p.points()).unwrap();
        let t = beta_hat_table(p.points(), &nn, 3, 2, None).unwrap();
        assert_eq!(t.get(0, 0), b_hat_raw(&nn, None).unwrap());
    }

    #[test]
    fn table_matches_naive_loop() {
        let p = pseudo_observations(&fixed_sample()).unwrap();
        let nn = nn_distances(p.points()).unwrap();
        let t = beta_hat_table(p.points(), &nn, 2, 2, None).unwrap();
        let n = p.len() as f64;
        let legendre = |k: usize, u: f64| -> f64 {
            let x = 2.0 * u - 1.0;
            match k {
                0 => 1.0,
                1 => 3f64.sqrt() * x,
                2 => 5f64.sqrt() * 0.5 * (3.0 * x * x - 1.0),
                _ => unreachable!(),
            }
        };
        for k in 0..=2 {
            for l in 0..=2 {
                let mut s = 0.0;
                for (i, u) in p.points().iter().enumerate() {
                    s += nn.values()[i] * legendre(k, u[0]) * legendre(l, u[1]);
                }
                let naive = 2.0 * (n - 1.0).sqrt() / n * s;
                assert!(close(t.get(k, l), naive, 1e-12));
            }
        }
    }

    #[test]
    fn table_swap_transposes() {
        let s = fixed_sample();
        let p = pseudo_observations(&s).unwrap();
        let q = pseudo_observations(&s.swapped()).unwrap();
        let a = beta_hat_table(p.points(), &nn_distances(p.points()).unwrap(), 3, 1, None).unwrap();
        let b = beta_hat_table(q.points(), &nn_distances(q.points()).unwrap(), 1, 3, None).unwrap();
        assert_eq!(a.transpose(), b);
        assert_eq!(a.sum_of_squares().to_bits(), b.sum_of_squares().to_bits());
    }

    #[test]
    fn sum_of_squares_rectangular() {
        let t = CoefficientTable::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(t.sum_of_squares(), 91.0);
        assert_eq!(t.transpose().sum_of_squares(), 91.0);
    }

    #[test]
    fn cutoff_capability() {
        let p = pseudo_observations(&fixed_sample()).unwrap();
        let nn = nn_distances(p.points()).unwrap();
        assert!(matches!(
            beta_hat_table(p.points(), &nn, 21, 0, None),
            Err(Error::Capability(_))
        ));
        let cfg = EstimatorConfig {
            cutoffs: Cutoffs::Fixed { k: 30, l: 1 },
            ..Default::default()
        };
        assert!(matches!(estimate(&fixed_sample(), &cfg), Err(Error::Capability(_))));
    }

    #[test]
    fn raw_mode_for_zero_cutoffs() {
        let cfg = EstimatorConfig {
            cutoffs: Cutoffs::Fixed { k: 0, l: 0 },
            transform: TransformKind::None,
            ..Default::default()
        };
        let r = estimate(&fixed_sample(), &cfg).unwrap();
        assert!(r.raw_mode);
        assert_eq!(r.eta, eta_from_b(r.b_raw.min(1.0)).unwrap());
    }

    #[test]
    fn monotone_maps_do_not_change_estimate() {
        let s = fixed_sample();
        let t = s.map_columns(|v| (3.0 * v).exp(), |v| v.powi(3) - 7.0).unwrap();
        for cfg in [
            EstimatorConfig::default(),
            EstimatorConfig {
                cutoffs: Cutoffs::Fixed { k: 2, l: 1 },
                transform: TransformKind::None,
                ..Default::default()
            },
        ] {
            assert_eq!(estimate(&s, &cfg).unwrap(), estimate(&t, &cfg).unwrap());
        }
    }

    #[test]
    fn result_ranges() {
        let r = estimate(&fixed_sample(), &EstimatorConfig::default()).unwrap();
        assert!((0.0..=1.0).contains(&r.b_normalized));
        assert!((0.0..=1.0).contains(&r.eta));
        assert_eq!(r.eta, eta_from_b(r.b_normalized).unwrap());
    }

    #[test]
    fn canonical_round_trip() {
        for cfg in [
            EstimatorConfig::default(),
            EstimatorConfig {
                cutoffs: Cutoffs::Fixed { k: 3, l: 0 },
                transform: TransformKind::None,
                ties: TiePolicy::Jitter { seed: 42 },
            },
        ] {
            assert_eq!(EstimatorConfig::from_canonical(&cfg.canonical()).unwrap(), cfg);
        }
        for bad in ["", "cutoffs=cv:5", "cutoffs=cv:5:5;transform=beta66", "cutoffs=cv:5:5;transform=x;ties=stable"] {
            assert!(matches!(EstimatorConfig::from_canonical(bad), Err(Error::Format(_))));
        }
    }
}
