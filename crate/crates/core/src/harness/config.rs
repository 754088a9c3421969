use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::{build_dictionary, AngularGrid, ArrayGeometry, SteeringDictionary};
use crate::error::{DoaError, Result};
use crate::methods::{Method, SolverSettings};
use crate::synthesis::{NoiseCase, NoiseSpec, SourceScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_sensors: usize,
    /// Sensor spacing in wavelengths.
    #[serde(default = "half")]
    pub spacing: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: -90.0,
            max: 89.5,
            step: 0.5,
        }
    }
}

/// Inclusive SNR sweep `start, start + step, ..., stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) {
            return Err(DoaError::Config(format!(
                "bad SNR range {} .. {} step {}",
                self.start, self.stop, self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                // keep values like -12.5 exact despite accumulated rounding
                (v * 1e9).round() / 1e9
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub cases: Vec<NoiseCase>,
    #[serde(default = "one")]
    pub decades: f64,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub snr_range: Option<SnrRange>,
}

fn one() -> f64 {
    1.0
}

impl NoiseConfig {
    /// Listed SNRs followed by the range, sorted ascending, duplicates removed.
    pub fn snr_values(&self) -> Result<Vec<f64>> {
        let mut v = self.snr_db.clone();
        if let Some(r) = &self.snr_range {
            v.extend(r.values()?);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(v)
    }

    pub fn spec(&self, case: NoiseCase, snr_db: f64) -> NoiseSpec {
        let mut s = NoiseSpec::new(case, snr_db);
        s.decades = self.decades;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SblOverrides {
    pub b: Option<f64>,
    pub eps_min: Option<f64>,
    pub j_max: Option<usize>,
    pub sigma_floor: Option<f64>,
    /// Number of sources the estimators look for; defaults to the scenario's.
    pub n_sources: Option<usize>,
}

/// Everything a Monte Carlo experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub scenario: SourceScenario,
    pub noise: NoiseConfig,
    pub snapshots: Vec<usize>,
    pub methods: Vec<Method>,
    pub n_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub sbl: SblOverrides,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| {
                DoaError::Config(format!(
                    "{e} (byte {})",
                    crate::io::byte_offset(text, e.line(), e.column())
                ))
            })?
        } else {
            toml::from_str(text).map_err(|e| {
                let at = e.span().map(|s| format!(" (byte {})", s.start)).unwrap_or_default();
                DoaError::Config(format!("{}{at}", e.message()))
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DoaError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| DoaError::Config(format!("{}: {}", path.display(), strip_config(e))))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DoaError::Config(m));
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.snapshots.is_empty() || self.snapshots.contains(&0) {
            return bad("snapshots must list positive snapshot counts".into());
        }
        if self.noise.cases.is_empty() {
            return bad("noise.cases must not be empty".into());
        }
        let snrs = self.noise.snr_values()?;
        if snrs.is_empty() {
            return bad("give noise.snr_db or noise.snr_range".into());
        }
        if snrs.iter().any(|s| s.is_nan()) {
            return bad("SNR values must be numbers".into());
        }
        self.scenario
            .validate()
            .map_err(|e| DoaError::Config(format!("scenario: {}", strip_config(e))))?;
        let k = self.n_sources();
        if k == 0 || k > self.scenario.n_sources() {
            return bad(format!(
                "sbl.n_sources = {k} must be between 1 and the scenario's {} sources",
                self.scenario.n_sources()
            ));
        }
        if k != self.scenario.n_sources() {
            return bad(format!(
                "scoring pairs every true DOA with an estimate, so sbl.n_sources must equal {}",
                self.scenario.n_sources()
            ));
        }
        let dict = self.dictionary()?;
        self.scenario
            .grid_indices(dict.grid())
            .map_err(|e| DoaError::Config(strip_config(e)))?;
        self.solver_settings()
            .config(k, crate::sbl::NoiseModel::CaseI)
            .validate(dict.n_sensors(), dict.n_grid())
            .map_err(|e| DoaError::Config(format!("sbl: {}", strip_config(e))))?;
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.sbl.n_sources.unwrap_or(self.scenario.n_sources())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let d = SolverSettings::default();
        SolverSettings {
            b: self.sbl.b.unwrap_or(d.b),
            eps_min: self.sbl.eps_min.unwrap_or(d.eps_min),
            j_max: self.sbl.j_max.unwrap_or(d.j_max),
            sigma_floor: self.sbl.sigma_floor.unwrap_or(d.sigma_floor),
        }
    }

    pub fn dictionary(&self) -> Result<SteeringDictionary> {
        let geom = ArrayGeometry::ula(self.geometry.n_sensors, self.geometry.spacing)
            .map_err(|e| DoaError::Config(format!("geometry: {}", strip_config(e))))?;
        let grid = AngularGrid::uniform(self.grid.min, self.grid.max, self.grid.step)
            .map_err(|e| DoaError::Config(format!("grid: {}", strip_config(e))))?;
        Ok(build_dictionary(&geom, &grid))
    }
}

fn strip_config(e: DoaError) -> String {
    match e {
        DoaError::Config(m) | DoaError::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}
