//! Double marginal Beta(6,6) transformation of the pseudo-observations.
//!
//! Each coordinate is pushed through the Beta(6,6) quantile function, which
//! pulls points away from the edges of the square. The affinity integral is
//! then recovered by weighting the nearest-neighbour distances of the
//! transformed points with `√ξ(t1)·√ξ(t2)`.

use crate::error::{Error, Result};
use crate::ranks_nn::{Point, PseudoObs};

/// `1 / B(6, 6) = Γ(12) / (Γ(6) Γ(6))`.
const BETA66_NORM: f64 = 2772.0;

const QUANTILE_TOL: f64 = 1e-12;

/// A continuous distribution on `[0, 1]` with bounded density.
pub trait MarginalTransform: Sync {
    fn pdf(&self, t: f64) -> f64;
    fn cdf(&self, t: f64) -> f64;
    fn quantile(&self, p: f64) -> Result<f64>;
}

/// The Beta(6,6) distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Beta66;

impl MarginalTransform for Beta66 {
    fn pdf(&self, t: f64) -> f64 {
        let s = t * (1.0 - t);
        BETA66_NORM * s * s * s * s * s
    }

    fn cdf(&self, t: f64) -> f64 {
        regularized_incomplete_beta(6.0, 6.0, t)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level {p} outside (0, 1)")));
        }
        Ok(invert_cdf(self, p))
    }
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument {t} outside [0, 1]")))
    }
}

pub fn beta66_pdf(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(Beta66.pdf(t))
}

pub fn beta66_cdf(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(Beta66.cdf(t))
}

pub fn beta66_quantile(p: f64) -> Result<f64> {
    Beta66.quantile(p)
}

/// Newton iteration kept inside a shrinking bisection bracket.
fn invert_cdf<T: MarginalTransform + ?Sized>(dist: &T, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t = p;
    for _ in 0..200 {
        let f = dist.cdf(t) - p;
        if f == 0.0 {
            return t;
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let d = dist.pdf(t);
        let newton = if d > 0.0 { t - f / d } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step < QUANTILE_TOL * 1e-2 || hi - lo < QUANTILE_TOL {
            break;
        }
    }
    t
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)`, by Lentz's continued fraction on
/// whichever of `x`, `1 − x` converges faster.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Transformed points and their density weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPoints {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl TransformedPoints {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `√ξ(t1)·√ξ(t2)` per point.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Beta(6,6) transform of every pseudo-observation.
pub fn transform_points(pseudo: &PseudoObs) -> Result<TransformedPoints> {
    transform_points_with(pseudo, &Beta66)
}

/// Pseudo-observations sit on the lattice `r / (n + 1)`, so one quantile per
/// rank serves both coordinates.
pub fn transform_points_with<T: MarginalTransform + ?Sized>(
    pseudo: &PseudoObs,
    dist: &T,
) -> Result<TransformedPoints> {
    let n = pseudo.len();
    let scale = (n + 1) as f64;
    let mut t_of_rank = vec![0.0; n + 1];
    let mut root_pdf = vec![0.0; n + 1];
    for r in 1..=n {
        let t = dist.quantile(r as f64 / scale)?;
        t_of_rank[r] = t;
        root_pdf[r] = dist.pdf(t).sqrt();
    }
    let points = pseudo
        .ranks()
        .iter()
        .map(|r| [t_of_rank[r[0]], t_of_rank[r[1]]])
        .collect();
    let weights = pseudo
        .ranks()
        .iter()
        .map(|r| root_pdf[r[0]] * root_pdf[r[1]])
        .collect();
    Ok(TransformedPoints { points, weights })
}
