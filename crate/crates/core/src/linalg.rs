//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{DoaError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// `(M + M^H) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Cholesky factor of a Hermitian positive definite matrix.
pub struct HermitianFactor {
    chol: Cholesky<Complex64, Dyn>,
}

impl HermitianFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let not_pd = || DoaError::numeric("matrix is not positive definite");
        let chol = Cholesky::new(m.clone()).ok_or_else(not_pd)?;
        // complex sqrt never fails, so a negative pivot shows up as an imaginary diagonal
        let l = chol.l_dirty();
        let ok = (0..l.nrows()).all(|i| {
            let d = l[(i, i)];
            d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-10 * d.re
        });
        if ok {
            Ok(Self { chol })
        } else {
            Err(not_pd())
        }
    }

    pub fn solve(&self, b: &CVector) -> CVector {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> CMatrix {
        hermitian_part(&self.chol.inverse())
    }

    /// `log det M`, real for Hermitian positive definite `M`.
    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
    }
}

/// Ratio of extreme singular values, used as a rank check.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
