//! Sparse Bayesian learning for multi-snapshot DOA estimation under
//! heteroscedastic noise.
//!
//! Each iteration rebuilds the per-snapshot data covariances from the
//! current source powers and noise variances, applies the multiplicative
//! power update, picks the `K` largest peaks as the active set and
//! re-estimates the noise from the residual outside the span of the active
//! steering vectors. The loop stops when the relative l1 change of the power
//! spectrum falls to `eps_min` or after `j_max` iterations.

mod active;
mod noise;
mod posterior;
mod update;

use serde::{Deserialize, Serialize};

use crate::array::SteeringDictionary;
use crate::beamform::sample_covariance;
use crate::error::{DoaError, Result};
use crate::synthesis::SnapshotMatrix;

pub use active::{projection_matrix, select_active_set, select_peaks};
pub use noise::{
    noise_estimate_case1, noise_estimate_case2, noise_estimate_case3, noise_estimate_em,
    NoiseEstimate,
};
pub use posterior::{log_likelihood, posterior_stats, PosteriorStats};
pub use update::{
    covariance_moments, covariance_moments_per_snapshot, data_covariance, gamma_update,
    gamma_update_from_moments, CovarianceMoments,
};

/// Noise model assumed by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Single variance for all sensors and snapshots.
    #[serde(rename = "I")]
    CaseI,
    /// One variance per snapshot from the projected residual.
    #[serde(rename = "II")]
    CaseII,
    /// One variance per sensor and snapshot from the projected residual.
    #[serde(rename = "III")]
    CaseIII,
    /// One variance per snapshot from the EM-style update.
    #[serde(rename = "II-EM")]
    CaseIIEm,
}

impl NoiseModel {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseModel::CaseI => "I",
            NoiseModel::CaseII => "II",
            NoiseModel::CaseIII => "III",
            NoiseModel::CaseIIEm => "II-EM",
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-grid-point source powers.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSpectrum {
    values: Vec<f64>,
}

impl GammaSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(m) = values.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(DoaError::invalid(format!(
                "source power at grid index {m} is {} (must be finite and >= 0)",
                values[m]
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            values: vec![0.0; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|m| self.values[*m] > 0.0)
            .collect()
    }

    /// `||new - old||_1 / ||old||_1`, zero when both vanish.
    pub fn relative_change(&self, old: &GammaSpectrum) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&old.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        let base = old.l1_norm();
        if diff == 0.0 {
            0.0
        } else if base == 0.0 {
            f64::INFINITY
        } else {
            diff / base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SblConfig {
    /// Number of sources assumed present.
    pub n_sources: usize,
    pub noise_model: NoiseModel,
    /// Exponent of the fixed-point power update.
    #[serde(default = "defaults::b")]
    pub b: f64,
    #[serde(default = "defaults::eps_min")]
    pub eps_min: f64,
    #[serde(default = "defaults::j_max")]
    pub j_max: usize,
    /// Variance floor relative to `tr(S_y) / N`.
    #[serde(default = "defaults::sigma_floor")]
    pub sigma_floor: f64,
}

mod defaults {
    pub fn b() -> f64 {
        0.5
    }
    pub fn eps_min() -> f64 {
        1e-3
    }
    pub fn j_max() -> usize {
        100
    }
    pub fn sigma_floor() -> f64 {
        1e-10
    }
}

impl SblConfig {
    pub fn new(n_sources: usize, noise_model: NoiseModel) -> Self {
        Self {
            n_sources,
            noise_model,
            b: defaults::b(),
            eps_min: defaults::eps_min(),
            j_max: defaults::j_max(),
            sigma_floor: defaults::sigma_floor(),
        }
    }

    pub fn validate(&self, n_sensors: usize, n_grid: usize) -> Result<()> {
        if self.n_sources == 0 || self.n_sources >= n_sensors {
            return Err(DoaError::invalid(format!(
                "need 1 <= K < N, got K = {}, N = {n_sensors}",
                self.n_sources
            )));
        }
        if self.n_sources >= n_grid {
            return Err(DoaError::invalid("K must be smaller than the grid size"));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(DoaError::invalid(format!("b must lie in (0, 1], got {}", self.b)));
        }
        if !(self.eps_min > 0.0) {
            return Err(DoaError::invalid("eps_min must be > 0"));
        }
        if self.j_max == 0 {
            return Err(DoaError::invalid("j_max must be >= 1"));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(DoaError::invalid("sigma_floor must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SblResult {
    pub gamma: GammaSpectrum,
    /// Grid indices of the `K` selected peaks, ascending.
    pub active_set: Vec<usize>,
    pub noise: NoiseEstimate,
    pub iterations: usize,
    pub eps_trace: Vec<f64>,
    pub converged: bool,
}

impl SblResult {
    pub fn final_eps(&self) -> f64 {
        self.eps_trace.last().copied().unwrap_or(0.0)
    }

    pub fn doas_deg(&self, dict: &SteeringDictionary) -> Vec<f64> {
        self.active_set
            .iter()
            .map(|m| dict.grid().angle(*m))
            .collect()
    }
}

/// State handed to an observer after every iteration.
pub struct IterationState<'a> {
    pub iteration: usize,
    pub gamma: &'a GammaSpectrum,
    pub noise: &'a NoiseEstimate,
    pub active_set: &'a [usize],
    pub eps: f64,
}

/// Variance floor for the given data: `sigma_floor * tr(S_y) / N`.
pub fn variance_floor(y: &SnapshotMatrix, sigma_floor: f64) -> f64 {
    let s = sample_covariance(y);
    let scale = s.trace() / y.n_sensors() as f64;
    if scale > 0.0 {
        sigma_floor * scale
    } else {
        sigma_floor
    }
}

/// Initial state: CBF powers and the configured noise estimator evaluated
/// with no sources (`P = 0`, `K = 0`).
pub fn initialize(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    config: &SblConfig,
) -> Result<(GammaSpectrum, NoiseEstimate)> {
    let s = sample_covariance(y);
    let gamma: Vec<f64> = dict
        .quadratic_forms(s.matrix())
        .into_iter()
        .map(|g| g.max(0.0))
        .collect();
    let floor = variance_floor(y, config.sigma_floor);
    let noise = match config.noise_model {
        NoiseModel::CaseI => noise_estimate_case1(y, None, 0, floor)?,
        // The EM update needs a previous state; start it from the same
        // overestimate as the projected per-snapshot estimator.
        NoiseModel::CaseII | NoiseModel::CaseIIEm => noise_estimate_case2(y, None, 0, floor)?,
        NoiseModel::CaseIII => noise_estimate_case3(y, None, floor)?,
    };
    Ok((GammaSpectrum::new(gamma)?, noise))
}

fn check_inputs(y: &SnapshotMatrix, dict: &SteeringDictionary, config: &SblConfig) -> Result<()> {
    if y.n_sensors() != dict.n_sensors() {
        return Err(DoaError::ShapeMismatch(format!(
            "data has {} sensors, dictionary {}",
            y.n_sensors(),
            dict.n_sensors()
        )));
    }
    config.validate(dict.n_sensors(), dict.n_grid())
}

pub fn sbl_run(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    config: &SblConfig,
) -> Result<SblResult> {
    sbl_run_observed(y, dict, config, |_| {})
}

/// Runs the solver and calls `observer` after every iteration.
pub fn sbl_run_observed<F>(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    config: &SblConfig,
    observer: F,
) -> Result<SblResult>
where
    F: FnMut(&IterationState<'_>),
{
    check_inputs(y, dict, config)?;
    let (gamma, noise) = initialize(y, dict, config)?;
    sbl_run_from(y, dict, config, gamma, noise, observer)
}

/// Runs the solver from an explicit initial state.
pub fn sbl_run_from<F>(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    config: &SblConfig,
    gamma_init: GammaSpectrum,
    noise_init: NoiseEstimate,
    mut observer: F,
) -> Result<SblResult>
where
    F: FnMut(&IterationState<'_>),
{
    check_inputs(y, dict, config)?;
    if gamma_init.len() != dict.n_grid() {
        return Err(DoaError::ShapeMismatch("initial spectrum length".into()));
    }
    let floor = variance_floor(y, config.sigma_floor);
    let k = config.n_sources;

    let mut gamma = gamma_init;
    let mut noise = noise_init;
    let mut active = select_active_set(&gamma, k);
    let mut eps = 2.0 * config.eps_min;
    let mut eps_trace = Vec::new();
    let mut j = 0;

    while eps > config.eps_min && j < config.j_max {
        let step = || -> Result<(GammaSpectrum, Vec<usize>, NoiseEstimate)> {
            let new_gamma = gamma_update(y, dict, &gamma, &noise, config.b)?;
            let new_active = select_active_set(&new_gamma, k);
            let p = projection_matrix(dict, &new_active)?;
            let new_noise = match config.noise_model {
                NoiseModel::CaseI => noise_estimate_case1(y, Some(&p), k, floor)?,
                NoiseModel::CaseII => noise_estimate_case2(y, Some(&p), k, floor)?,
                NoiseModel::CaseIII => noise_estimate_case3(y, Some(&p), floor)?,
                NoiseModel::CaseIIEm => {
                    noise_estimate_em(y, dict, &new_gamma, &noise, floor)?
                }
            };
            Ok((new_gamma, new_active, new_noise))
        };
        let (new_gamma, new_active, new_noise) = step().map_err(|e| DoaError::Iteration {
            iteration: j,
            source: Box::new(e),
        })?;
        eps = new_gamma.relative_change(&gamma);
        gamma = new_gamma;
        active = new_active;
        noise = new_noise;
        j += 1;
        eps_trace.push(eps);
        // ascent is not guaranteed for b != 1, so this is only reported
        if log::log_enabled!(log::Level::Debug) {
            if let Ok(ll) = log_likelihood(y, dict, &gamma, &noise) {
                log::debug!("iteration {j}: eps {eps:.3e}, log-likelihood {ll:.6e}, active {active:?}");
            }
        }
        observer(&IterationState {
            iteration: j,
            gamma: &gamma,
            noise: &noise,
            active_set: &active,
            eps,
        });
    }

    Ok(SblResult {
        gamma,
        active_set: active,
        noise,
        iterations: j,
        converged: eps <= config.eps_min,
        eps_trace,
    })
}
