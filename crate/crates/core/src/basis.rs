//! Orthonormal shifted Legendre polynomials on `[0, 1]`.

use crate::error::{Error, Result};

/// Highest degree supported by [`ShiftedLegendre`].
pub const MAX_DEGREE: usize = 20;

/// An orthonormal basis of `L2([0, 1])` whose member of degree 0 is the
/// constant 1.
pub trait Basis: Sync {
    fn max_degree(&self) -> usize;

    /// Writes `b_0(u), ..., b_{out.len()-1}(u)` into `out`.
    fn eval_into(&self, u: f64, out: &mut [f64]) -> Result<()>;

    fn eval_upto(&self, u: f64, degree: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; degree + 1];
        self.eval_into(u, &mut out)?;
        Ok(out)
    }
}

/// `b_k(u) = √(2k+1) P_k(2u − 1)`, evaluated with the three-term recurrence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShiftedLegendre;

impl Basis for ShiftedLegendre {
    fn max_degree(&self) -> usize {
        MAX_DEGREE
    }

    fn eval_into(&self, u: f64, out: &mut [f64]) -> Result<()> {
        check_unit(u)?;
        if out.len() > MAX_DEGREE + 1 {
            return Err(Error::Capability(format!(
                "degree {} exceeds the supported maximum {MAX_DEGREE}",
                out.len() - 1
            )));
        }
        let x = 2.0 * u - 1.0;
        let (mut prev, mut cur) = (0.0, 1.0);
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = ((2 * k + 1) as f64).sqrt() * cur;
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        Ok(())
    }
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain(format!("basis argument {u} outside [0, 1]")))
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        Err(Error::Capability(format!(
            "degree {k} exceeds the supported maximum {MAX_DEGREE}"
        )))
    } else {
        Ok(())
    }
}

/// Value of the degree-`k` basis function at `u`.
pub fn basis_eval(k: usize, u: f64) -> Result<f64> {
    check_degree(k)?;
    Ok(ShiftedLegendre.eval_upto(u, k)?[k])
}

/// Tensor products `b_k(u1) b_l(u2)` for `k ≤ kmax`, `l ≤ lmax`, indexed
/// `[k][l]`.
pub fn basis_row(u1: f64, u2: f64, kmax: usize, lmax: usize) -> Result<Vec<Vec<f64>>> {
    check_degree(kmax)?;
    check_degree(lmax)?;
    let a = ShiftedLegendre.eval_upto(u1, kmax)?;
    let b = ShiftedLegendre.eval_upto(u2, lmax)?;
    Ok(a.iter().map(|&ak| b.iter().map(|&bl| ak * bl).collect()).collect())
}

/// Basis values at a fixed set of coordinates, cached as `[point][degree]`
/// for each axis.
#[derive(Debug, Clone)]
pub(crate) struct BasisCache {
    degree: [usize; 2],
    values: [Vec<f64>; 2],
}

impl BasisCache {
    pub(crate) fn new(points: &[[f64; 2]], kmax: usize, lmax: usize) -> Result<Self> {
        check_degree(kmax)?;
        check_degree(lmax)?;
        let degree = [kmax, lmax];
        let mut values = [
            vec![0.0; points.len() * (kmax + 1)],
            vec![0.0; points.len() * (lmax + 1)],
        ];
        for axis in 0..2 {
            let w = degree[axis] + 1;
            for (i, p) in points.iter().enumerate() {
                ShiftedLegendre.eval_into(p[axis], &mut values[axis][i * w..(i + 1) * w])?;
            }
        }
        Ok(Self { degree, values })
    }

    #[inline]
    pub(crate) fn get(&self, axis: usize, i: usize) -> &[f64] {
        let w = self.degree[axis] + 1;
        &self.values[axis][i * w..(i + 1) * w]
    }
}
