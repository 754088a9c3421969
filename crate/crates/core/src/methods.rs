//! Uniform entry point for every estimator the harness compares.

use serde::{Deserialize, Serialize};

use crate::array::SteeringDictionary;
use crate::beamform::{
    cbf_spectrum_tagged, music_spectrum, prewhiten, sample_covariance, Spectrum,
};
use crate::error::{DoaError, Result};
use crate::metrics::{find_peaks, DoaEstimate};
use crate::sbl::{sbl_run, NoiseModel, SblConfig, SblResult};
use crate::synthesis::{NoiseCase, SnapshotMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CBF")]
    Cbf,
    #[serde(rename = "CBF2")]
    Cbf2,
    #[serde(rename = "CBF-Phase")]
    CbfPhase,
    #[serde(rename = "MUSIC")]
    Music,
    #[serde(rename = "SBL")]
    Sbl,
    #[serde(rename = "SBL2")]
    Sbl2,
    #[serde(rename = "SBL2-EM")]
    Sbl2Em,
    #[serde(rename = "SBL3")]
    Sbl3,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Cbf,
        Method::Cbf2,
        Method::CbfPhase,
        Method::Music,
        Method::Sbl,
        Method::Sbl2,
        Method::Sbl2Em,
        Method::Sbl3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Cbf => "CBF",
            Method::Cbf2 => "CBF2",
            Method::CbfPhase => "CBF-Phase",
            Method::Music => "MUSIC",
            Method::Sbl => "SBL",
            Method::Sbl2 => "SBL2",
            Method::Sbl2Em => "SBL2-EM",
            Method::Sbl3 => "SBL3",
        }
    }

    /// Noise model of the SBL variants.
    pub fn noise_model(&self) -> Option<NoiseModel> {
        match self {
            Method::Sbl => Some(NoiseModel::CaseI),
            Method::Sbl2 => Some(NoiseModel::CaseII),
            Method::Sbl2Em => Some(NoiseModel::CaseIIEm),
            Method::Sbl3 => Some(NoiseModel::CaseIII),
            _ => None,
        }
    }

    pub fn is_sbl(&self) -> bool {
        self.noise_model().is_some()
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = DoaError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| DoaError::invalid(format!("unknown method '{s}'")))
    }
}

/// Solver knobs shared by all SBL variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub b: f64,
    pub eps_min: f64,
    pub j_max: usize,
    pub sigma_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let c = SblConfig::new(1, NoiseModel::CaseI);
        Self {
            b: c.b,
            eps_min: c.eps_min,
            j_max: c.j_max,
            sigma_floor: c.sigma_floor,
        }
    }
}

impl SolverSettings {
    pub fn config(&self, n_sources: usize, model: NoiseModel) -> SblConfig {
        SblConfig {
            n_sources,
            noise_model: model,
            b: self.b,
            eps_min: self.eps_min,
            j_max: self.j_max,
            sigma_floor: self.sigma_floor,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub spectrum: Spectrum,
    pub estimate: DoaEstimate,
    pub sbl: Option<SblResult>,
}

/// Runs `method` on the data assuming `n_sources` sources.
pub fn run_method(
    method: Method,
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    n_sources: usize,
    settings: &SolverSettings,
) -> Result<MethodOutput> {
    let beam = |data: &SnapshotMatrix| -> Result<MethodOutput> {
        let spectrum = cbf_spectrum_tagged(dict, &sample_covariance(data), method.name())?;
        let estimate = find_peaks(&spectrum, n_sources)?;
        Ok(MethodOutput {
            spectrum,
            estimate,
            sbl: None,
        })
    };
    match method {
        Method::Cbf => beam(y),
        Method::Cbf2 => beam(&prewhiten(y, NoiseCase::II).data),
        Method::CbfPhase => beam(&prewhiten(y, NoiseCase::III).data),
        Method::Music => {
            let spectrum = music_spectrum(dict, &sample_covariance(y), n_sources)?;
            let estimate = find_peaks(&spectrum, n_sources)?;
            Ok(MethodOutput {
                spectrum,
                estimate,
                sbl: None,
            })
        }
        _ => {
            let model = method.noise_model().expect("SBL variant");
            let res = sbl_run(y, dict, &settings.config(n_sources, model))?;
            let spectrum = Spectrum::new(
                dict.grid().clone(),
                res.gamma.values().to_vec(),
                method.name(),
            )?;
            let estimate = DoaEstimate::new(res.doas_deg(dict), method.name());
            Ok(MethodOutput {
                spectrum,
                estimate,
                sbl: Some(res),
            })
        }
    }
}
