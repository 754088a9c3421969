use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{GammaSpectrum, NoiseEstimate};
use crate::array::SteeringDictionary;
use crate::beamform::CovarianceMatrix;
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_part, CMatrix, HermitianFactor};
use crate::synthesis::SnapshotMatrix;

/// `Sigma_y_l = Sigma_n_l + A Gamma A^H` for snapshot `l`.
pub fn data_covariance(
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
    l: usize,
) -> Result<CovarianceMatrix> {
    if l >= noise.n_snapshots() {
        return Err(DoaError::invalid(format!("snapshot index {l} out of range")));
    }
    let mut sigma = dict.weighted_gram(gamma.values());
    for n in 0..dict.n_sensors() {
        sigma[(n, n)] += noise.variances()[(n, l)];
    }
    CovarianceMatrix::new(sigma)
}

/// Snapshot sums that drive the power update:
/// `q = sum_l Sigma_l^{-1}` and `r = sum_l Sigma_l^{-1} y_l y_l^H Sigma_l^{-1}`.
///
/// With these, `sum_l a^H Sigma_l^{-1} a = a^H q a` and
/// `sum_l |y_l^H Sigma_l^{-1} a|^2 = a^H r a`.
#[derive(Debug, Clone)]
pub struct CovarianceMoments {
    pub q: CMatrix,
    pub r: CMatrix,
}

/// Computes the moments, sharing work across snapshots when the noise is
/// constant or column-constant.
pub fn covariance_moments(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
) -> Result<CovarianceMoments> {
    check_shapes(y, dict, gamma, noise)?;
    let gram = dict.weighted_gram(gamma.values());
    if noise.is_constant() {
        constant_noise_moments(y, &gram, noise.variances()[(0, 0)])
    } else if noise.is_column_constant() {
        match column_noise_moments(y, &gram, noise) {
            Some(m) => Ok(m),
            None => per_snapshot_moments(y, &gram, noise),
        }
    } else {
        per_snapshot_moments(y, &gram, noise)
    }
}

/// Reference path: one factorization per snapshot regardless of structure.
pub fn covariance_moments_per_snapshot(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
) -> Result<CovarianceMoments> {
    check_shapes(y, dict, gamma, noise)?;
    per_snapshot_moments(y, &dict.weighted_gram(gamma.values()), noise)
}

fn check_shapes(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
) -> Result<()> {
    if gamma.len() != dict.n_grid() {
        return Err(DoaError::ShapeMismatch(format!(
            "{} source powers for {} grid points",
            gamma.len(),
            dict.n_grid()
        )));
    }
    if noise.variances().shape() != y.data().shape() || y.n_sensors() != dict.n_sensors() {
        return Err(DoaError::ShapeMismatch(
            "noise estimate, data and dictionary disagree in size".into(),
        ));
    }
    Ok(())
}

fn constant_noise_moments(y: &SnapshotMatrix, gram: &CMatrix, var: f64) -> Result<CovarianceMoments> {
    let n = gram.nrows();
    let l = y.n_snapshots() as f64;
    let mut sigma = gram.clone();
    for i in 0..n {
        sigma[(i, i)] += var;
    }
    let factor = HermitianFactor::new(&sigma)?;
    let inv = factor.inverse();
    let w = &inv * y.data();
    Ok(CovarianceMoments {
        q: inv * Complex64::new(l, 0.0),
        r: hermitian_part(&(&w * w.adjoint())),
    })
}

fn column_noise_moments(
    y: &SnapshotMatrix,
    gram: &CMatrix,
    noise: &NoiseEstimate,
) -> Option<CovarianceMoments> {
    let n = gram.nrows();
    let eig = SymmetricEigen::try_new(gram.clone(), 1e-15, 10_000)?;
    let u = eig.eigenvectors;
    let lambda: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let z = u.adjoint() * y.data();
    let mut qdiag = vec![0.0; n];
    let mut v = DMatrix::<Complex64>::zeros(n, y.n_snapshots());
    for l in 0..y.n_snapshots() {
        let var = noise.variances()[(0, l)];
        for k in 0..n {
            let d = 1.0 / (lambda[k] + var);
            qdiag[k] += d;
            v[(k, l)] = z[(k, l)] * d;
        }
    }
    let uq = DMatrix::from_fn(n, n, |i, k| u[(i, k)] * qdiag[k]);
    let uv = &u * v;
    Some(CovarianceMoments {
        q: hermitian_part(&(uq * u.adjoint())),
        r: hermitian_part(&(&uv * uv.adjoint())),
    })
}

fn per_snapshot_moments(
    y: &SnapshotMatrix,
    gram: &CMatrix,
    noise: &NoiseEstimate,
) -> Result<CovarianceMoments> {
    let n = gram.nrows();
    let mut q = CMatrix::zeros(n, n);
    let mut w = CMatrix::zeros(n, y.n_snapshots());
    for l in 0..y.n_snapshots() {
        let mut sigma = gram.clone();
        for i in 0..n {
            sigma[(i, i)] += noise.variances()[(i, l)];
        }
        let factor = HermitianFactor::new(&sigma)
            .map_err(|_| DoaError::numeric(format!("data covariance of snapshot {l} is not positive definite")))?;
        let inv = factor.inverse();
        w.set_column(l, &(&inv * y.data().column(l)));
        q += inv;
    }
    Ok(CovarianceMoments {
        q: hermitian_part(&q),
        r: hermitian_part(&(&w * w.adjoint())),
    })
}

/// Fixed-point power update
/// `gamma_m <- gamma_m * (sum_l |y_l^H Sigma_l^{-1} a_m|^2 / sum_l a_m^H Sigma_l^{-1} a_m)^b`.
pub fn gamma_update(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma_old: &GammaSpectrum,
    noise: &NoiseEstimate,
    b: f64,
) -> Result<GammaSpectrum> {
    let moments = covariance_moments(y, dict, gamma_old, noise)?;
    gamma_update_from_moments(gamma_old, dict, &moments, b)
}

pub fn gamma_update_from_moments(
    gamma_old: &GammaSpectrum,
    dict: &SteeringDictionary,
    moments: &CovarianceMoments,
    b: f64,
) -> Result<GammaSpectrum> {
    let num = dict.quadratic_forms(&moments.r);
    let den = dict.quadratic_forms(&moments.q);
    let mut out = Vec::with_capacity(gamma_old.len());
    for (m, g) in gamma_old.values().iter().enumerate() {
        if *g == 0.0 {
            out.push(0.0);
            continue;
        }
        let ratio = num[m].max(0.0) / den[m];
        if !(ratio.is_finite() && den[m] > 0.0) {
            return Err(DoaError::numeric(format!(
                "power update ratio at grid index {m} is not finite (numerator {}, denominator {})",
                num[m], den[m]
            )));
        }
        out.push(g * ratio.powf(b));
    }
    GammaSpectrum::new(out)
}
