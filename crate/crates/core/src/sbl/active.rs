use nalgebra::SymmetricEigen;

use super::GammaSpectrum;
use crate::array::SteeringDictionary;
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_part, CMatrix};

/// Largest acceptable condition number of `A_M^H A_M`.
const MAX_CONDITION: f64 = 1e12;

/// Indices of the `k` largest local maxima of `values`, ascending.
///
/// A point is a local maximum if it is `>=` both neighbours (one neighbour at
/// the ends). Ties go to the lower index. When fewer than `k` maxima exist
/// the remaining slots take the largest other values.
pub fn select_peaks(values: &[f64], k: usize) -> Vec<usize> {
    let m = values.len();
    let k = k.min(m);
    let is_peak = |i: usize| {
        let left = i == 0 || values[i] >= values[i - 1];
        let right = i + 1 == m || values[i] >= values[i + 1];
        left && right
    };
    let by_value = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));

    let mut peaks: Vec<usize> = (0..m).filter(|i| is_peak(*i)).collect();
    peaks.sort_by(by_value);
    peaks.truncate(k);
    if peaks.len() < k {
        let mut rest: Vec<usize> = (0..m).filter(|i| !peaks.contains(i)).collect();
        rest.sort_by(by_value);
        peaks.extend(rest.into_iter().take(k - peaks.len()));
    }
    peaks.sort_unstable();
    peaks
}

/// Active set: grid indices of the `k` largest peaks of the power spectrum.
pub fn select_active_set(gamma: &GammaSpectrum, k: usize) -> Vec<usize> {
    select_peaks(gamma.values(), k)
}

/// Orthogonal projector `A_M (A_M^H A_M)^{-1} A_M^H` onto the span of the
/// active steering vectors. An empty active set gives the zero matrix.
pub fn projection_matrix(dict: &SteeringDictionary, active: &[usize]) -> Result<CMatrix> {
    let n = dict.n_sensors();
    if active.is_empty() {
        return Ok(CMatrix::zeros(n, n));
    }
    if let Some(bad) = active.iter().find(|m| **m >= dict.n_grid()) {
        return Err(DoaError::invalid(format!("active index {bad} outside the grid")));
    }
    let a = dict.columns(active);
    let gram = hermitian_part(&a.ad_mul(&a));
    let eig = SymmetricEigen::try_new(gram.clone(), 1e-15, 10_000)
        .ok_or_else(|| DoaError::numeric("eigendecomposition of the active Gram matrix failed"))?;
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(DoaError::numeric(format!(
            "active steering vectors are rank deficient (condition {:.3e})",
            max / min
        )));
    }
    // Q Q^H from a thin QR is idempotent to rounding, unlike the Gram inverse
    let q = a.qr().q();
    Ok(hermitian_part(&(&q * q.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_dictionary, AngularGrid, ArrayGeometry};
    use num_complex::Complex64;

    #[test]
    fn isolated_spikes() {
        let mut v = vec![0.1; 361];
        v[6] = 5.0;
        v[10] = 3.0;
        v[280] = 4.0;
        assert_eq!(select_peaks(&v, 3), vec![6, 10, 280]);
        assert_eq!(select_peaks(&v, 1), vec![6]);
    }

    #[test]
    fn monotone_uses_boundary() {
        let v: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(select_peaks(&v, 1), vec![19]);
        let rev: Vec<f64> = v.iter().rev().cloned().collect();
        assert_eq!(select_peaks(&rev, 1), vec![0]);
        // one peak only: the fallback fills with the next largest values
        assert_eq!(select_peaks(&v, 3), vec![17, 18, 19]);
    }

    #[test]
    fn plateau_takes_lowest_index() {
        let v = vec![0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(select_peaks(&v, 1), vec![2]);
        let flat = vec![1.0; 10];
        assert_eq!(select_peaks(&flat, 3), vec![0, 1, 2]);
    }

    #[test]
    fn shoulder_is_not_a_peak() {
        // the broad lobe at 2..6 should yield one peak, then the small one at 9
        let v = vec![0.0, 1.0, 4.0, 9.0, 8.0, 7.5, 1.0, 0.0, 0.5, 2.0, 0.5];
        assert_eq!(select_peaks(&v, 2), vec![3, 9]);
    }

    fn dict() -> SteeringDictionary {
        build_dictionary(
            &ArrayGeometry::ula(20, 0.5).unwrap(),
            &AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap(),
        )
    }

    #[test]
    fn single_column_projector() {
        let d = dict();
        let p = projection_matrix(&d, &[174]).unwrap();
        let a = d.column(174);
        let want = &a * a.adjoint() / Complex64::new(20.0, 0.0);
        assert!((p - want).norm() < 1e-12);
    }

    #[test]
    fn projector_algebra() {
        let d = dict();
        let active = [174, 184, 280];
        let p = projection_matrix(&d, &active).unwrap();
        assert!((&p - p.adjoint()).norm() < 1e-10);
        assert!((&p * &p - &p).norm() < 1e-10);
        let tr: f64 = p.diagonal().iter().map(|z| z.re).sum();
        assert!((tr - 3.0).abs() < 1e-8);
        let resid = (CMatrix::identity(20, 20) - &p) * d.columns(&active);
        assert!(resid.norm() < 1e-9);
        assert_eq!(projection_matrix(&d, &[]).unwrap(), CMatrix::zeros(20, 20));
    }

    #[test]
    fn rank_deficient_rejected() {
        let d = dict();
        assert!(projection_matrix(&d, &[10, 10]).is_err());
        assert!(projection_matrix(&d, &[400]).is_err());
    }
}
