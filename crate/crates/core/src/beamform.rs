//! Sample covariance, pre-whitening and the classical spectra (CBF and its
//! whitened variants, MUSIC).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::array::{AngularGrid, SteeringDictionary};
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_part, CMatrix};
use crate::synthesis::{NoiseCase, SnapshotMatrix};

/// Floor on `||E_n^H a||^2` in the MUSIC pseudospectrum.
pub const MUSIC_EPS: f64 = 1e-12;

/// Hermitian N x N covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: CMatrix,
}

impl CovarianceMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(DoaError::ShapeMismatch("covariance must be square".into()));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

/// `S = Y Y^H / L`
pub fn sample_covariance(y: &SnapshotMatrix) -> CovarianceMatrix {
    let d = y.data();
    let s = d * d.adjoint() / Complex64::new(d.ncols() as f64, 0.0);
    CovarianceMatrix {
        matrix: hermitian_part(&s),
    }
}

/// Angular power spectrum for any method.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: AngularGrid,
    pub values: Vec<f64>,
    pub method_tag: String,
}

impl Spectrum {
    pub fn new(grid: AngularGrid, values: Vec<f64>, method_tag: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(DoaError::ShapeMismatch(format!(
                "{} spectrum values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            method_tag: method_tag.into(),
        })
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `10 log10(p)` with a floor of -300 dB.
    pub fn values_db(&self) -> Vec<f64> {
        self.values.iter().map(|p| power_to_db(*p)).collect()
    }
}

pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(-300.0)
    } else {
        -300.0
    }
}

/// Whitened data plus a count of entries (or columns) that could not be
/// normalized because they were exactly zero.
#[derive(Debug, Clone)]
pub struct Prewhitened {
    pub data: SnapshotMatrix,
    pub degenerate: usize,
}

/// Normalizes the data according to the noise case: global scaling (I),
/// per-snapshot norm (II), or per-entry magnitude (III, phase only).
/// Zero columns or entries map to zero and are reported as degenerate.
pub fn prewhiten(y: &SnapshotMatrix, case: NoiseCase) -> Prewhitened {
    let d = y.data();
    let (n, l) = d.shape();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = d.clone();
    let mut degenerate = 0;
    match case {
        NoiseCase::I => {
            let fro = d.norm();
            if fro > 0.0 {
                out *= Complex64::new(((n * l) as f64).sqrt() / fro, 0.0);
            } else {
                degenerate = 1;
                out.fill(zero);
            }
        }
        NoiseCase::II => {
            for mut col in out.column_iter_mut() {
                let norm = col.norm();
                if norm > 0.0 {
                    col *= Complex64::new((n as f64).sqrt() / norm, 0.0);
                } else {
                    degenerate += 1;
                    col.fill(zero);
                }
            }
        }
        NoiseCase::III => {
            for z in out.iter_mut() {
                let r = z.norm();
                if r > 0.0 {
                    *z /= r;
                } else {
                    degenerate += 1;
                    *z = zero;
                }
            }
        }
    }
    if degenerate > 0 {
        log::warn!("pre-whitening (case {case}): {degenerate} zero-magnitude values mapped to 0");
    }
    Prewhitened {
        data: SnapshotMatrix::from_parts(out, None, y.seed),
        degenerate,
    }
}

fn check_dims(dict: &SteeringDictionary, s: &CovarianceMatrix) -> Result<()> {
    if s.dim() != dict.n_sensors() {
        return Err(DoaError::ShapeMismatch(format!(
            "covariance is {0}x{0}, dictionary has {1} sensors",
            s.dim(),
            dict.n_sensors()
        )));
    }
    Ok(())
}

/// Bartlett spectrum `a_m^H S a_m`.
pub fn cbf_spectrum(dict: &SteeringDictionary, s: &CovarianceMatrix) -> Result<Spectrum> {
    cbf_spectrum_tagged(dict, s, "CBF")
}

pub fn cbf_spectrum_tagged(
    dict: &SteeringDictionary,
    s: &CovarianceMatrix,
    tag: &str,
) -> Result<Spectrum> {
    check_dims(dict, s)?;
    Spectrum::new(dict.grid().clone(), dict.quadratic_forms(s.matrix()), tag)
}

/// MUSIC pseudospectrum `1 / ||E_n^H a_m||^2` with `E_n` spanning the
/// `N - K` smallest eigenvectors of `S`.
pub fn music_spectrum(
    dict: &SteeringDictionary,
    s: &CovarianceMatrix,
    n_sources: usize,
) -> Result<Spectrum> {
    check_dims(dict, s)?;
    let n = s.dim();
    if n_sources == 0 || n_sources >= n {
        return Err(DoaError::invalid(format!(
            "MUSIC needs 1 <= K < N, got K = {n_sources}, N = {n}"
        )));
    }
    let eig = SymmetricEigen::try_new(s.matrix().clone(), 1e-14, 10_000)
        .ok_or_else(|| DoaError::numeric("eigendecomposition did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let noise_vecs: CMatrix = eig.eigenvectors.select_columns(&order[..n - n_sources]);
    let projector = hermitian_part(&(&noise_vecs * noise_vecs.adjoint()));
    let values = dict
        .quadratic_forms(&projector)
        .into_iter()
        .map(|d| 1.0 / d.max(MUSIC_EPS))
        .collect();
    Spectrum::new(dict.grid().clone(), values, "MUSIC")
}

/// Identity covariance helper used by tests and examples.
pub fn identity_covariance(n: usize) -> CovarianceMatrix {
    CovarianceMatrix {
        matrix: DMatrix::identity(n, n),
    }
}
