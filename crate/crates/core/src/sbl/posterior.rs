use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{GammaSpectrum, NoiseEstimate};
use crate::array::SteeringDictionary;
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_part, CMatrix, HermitianFactor};
use crate::synthesis::SnapshotMatrix;

/// Posterior moments of the source amplitudes.
#[derive(Debug, Clone)]
pub struct PosteriorStats {
    /// M x L posterior means; rows with zero power are exactly zero.
    pub x_map: CMatrix,
    /// Per-snapshot K x K posterior covariance over `active_set`.
    pub sigma_x: Vec<CMatrix>,
    pub active_set: Vec<usize>,
}

pub(super) fn snapshot_covariance(
    gram: &CMatrix,
    noise: &NoiseEstimate,
    l: usize,
) -> Result<HermitianFactor> {
    let mut sigma = gram.clone();
    for n in 0..gram.nrows() {
        sigma[(n, n)] += noise.variances()[(n, l)];
    }
    HermitianFactor::new(&sigma).map_err(|_| {
        DoaError::numeric(format!("data covariance of snapshot {l} is not positive definite"))
    })
}

/// Posterior mean `x_l = Gamma A^H Sigma_y_l^{-1} y_l`, kept on `active`, and the posterior
/// covariance `(A_M^H Sigma_n_l^{-1} A_M + Gamma_M^{-1})^{-1}` on `active`.
pub fn posterior_stats(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
    active: &[usize],
) -> Result<PosteriorStats> {
    let support = gamma.support();
    if support.is_empty() {
        return Err(DoaError::InvalidState("source powers are all zero".into()));
    }
    if let Some(m) = active.iter().find(|m| gamma.values()[**m] <= 0.0) {
        return Err(DoaError::invalid(format!(
            "active index {m} has zero source power"
        )));
    }
    let (n, l) = y.data().shape();
    let gram = dict.weighted_gram(gamma.values());

    let mut w = CMatrix::zeros(n, l);
    for col in 0..l {
        let f = snapshot_covariance(&gram, noise, col)?;
        w.set_column(col, &f.solve(&y.data().column(col).into_owned()));
    }
    let a_sup = dict.columns(&support);
    let proj = a_sup.ad_mul(&w);
    let mut x_map = CMatrix::zeros(dict.n_grid(), l);
    // rows outside the active set stay zero
    for (row, m) in support.iter().enumerate() {
        if !active.contains(m) {
            continue;
        }
        let g = gamma.values()[*m];
        for col in 0..l {
            x_map[(*m, col)] = proj[(row, col)] * g;
        }
    }

    let a_act = dict.columns(active);
    let k = active.len();
    let mut sigma_x = Vec::with_capacity(l);
    for col in 0..l {
        if k == 0 {
            sigma_x.push(CMatrix::zeros(0, 0));
            continue;
        }
        let scaled = DMatrix::from_fn(n, k, |i, j| a_act[(i, j)] / noise.variances()[(i, col)]);
        let mut info = a_act.ad_mul(&scaled);
        for (i, m) in active.iter().enumerate() {
            info[(i, i)] += Complex64::new(1.0 / gamma.values()[*m], 0.0);
        }
        let f = HermitianFactor::new(&hermitian_part(&info))
            .map_err(|_| DoaError::numeric("posterior information matrix is not positive definite"))?;
        sigma_x.push(f.inverse());
    }

    Ok(PosteriorStats {
        x_map,
        sigma_x,
        active_set: active.to_vec(),
    })
}

/// `-sum_l (y_l^H Sigma_y_l^{-1} y_l + log det Sigma_y_l)`, constants dropped.
pub fn log_likelihood(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise: &NoiseEstimate,
) -> Result<f64> {
    let gram = dict.weighted_gram(gamma.values());
    let mut total = 0.0;
    for col in 0..y.n_snapshots() {
        let f = snapshot_covariance(&gram, noise, col)?;
        let yl = y.data().column(col).into_owned();
        let quad = yl.dotc(&f.solve(&yl)).re;
        total -= quad + f.log_det();
    }
    Ok(total)
}
