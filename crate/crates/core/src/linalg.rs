//! Dense linear-algebra helpers shared by the exact evaluators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

pub fn det_c(m: &CMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

/// Log-determinant of a symmetric positive-definite matrix; `None` if the factorization fails.
pub fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum())
}

/// Log-determinant of a Hermitian positive-definite matrix; `None` unless every pivot is
/// real and positive.
pub fn log_det_hpd(m: &CMatrix) -> Option<f64> {
    // the complex factorization takes square roots of negative pivots instead of failing
    let chol = m.clone().cholesky()?;
    let diag = chol.l_dirty().diagonal();
    if diag.iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re) {
        return None;
    }
    Some(diag.iter().map(|d| 2.0 * d.re.ln()).sum())
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_c(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff_c(m, &m.adjoint()) <= tol
}

/// Logarithm of `det(m(1))` continued from `det(m(0))` along `t in [0,1]`.
///
/// `m(0)` must have a positive real determinant; its real logarithm fixes the branch. The
/// argument is unwrapped step by step and steps are bisected until every increment is below
/// a quarter turn. A modulus collapsing below `1e-280` relative to the start is reported as
/// a branch failure.
pub fn continued_log_det<F>(m: F) -> Result<Complex64>
where
    F: Fn(f64) -> CMatrix,
{
    let d0 = det_c(&m(0.0));
    if !(d0.re > 0.0) || d0.im.abs() > 1e-10 * d0.re {
        return Err(Error::BranchFailure);
    }
    let floor = d0.norm() * 1e-280;
    let mut acc_arg = 0.0;
    let mut t: f64 = 0.0;
    let mut prev = d0;
    let mut step: f64 = 1.0 / 32.0;
    while t < 1.0 {
        let next_t = (t + step).min(1.0);
        let d = det_c(&m(next_t));
        if d.norm() <= floor || !d.norm().is_finite() {
            return Err(Error::BranchFailure);
        }
        let inc = (d / prev).arg();
        if inc.abs() > std::f64::consts::FRAC_PI_4 {
            if step < 1e-9 {
                return Err(Error::BranchFailure);
            }
            step *= 0.5;
            continue;
        }
        acc_arg += inc;
        prev = d;
        t = next_t;
        step = (step * 2.0).min(1.0 / 32.0);
    }
    Ok(Complex64::new(prev.norm().ln(), acc_arg))
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// `ln(n!)`: direct sum for small n, log-gamma beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n < 64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}
