use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::plot;
use crate::error::Result;
use crate::io::{rmse_csv, RmseRow, CSV_SCHEMA_VERSION};
use crate::methods::{run_method, Method};
use crate::metrics::{matched_errors, RmseSummary};
use crate::synthesis::{derive_seed, simulate, NoiseCase};

/// A cell fails when more than this fraction of its trials error.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

/// Seed of one trial. It depends on the cell's values, not its position
/// in the sweep, so adding SNRs or methods never changes existing cells.
pub fn trial_seed(base_seed: u64, case: NoiseCase, snr_db: f64, n_snapshots: usize, trial: usize) -> u64 {
    derive_seed(
        base_seed,
        &[case_code(case), snr_db.to_bits(), n_snapshots as u64, trial as u64],
    )
}

fn case_code(case: NoiseCase) -> u64 {
    match case {
        NoiseCase::I => 1,
        NoiseCase::II => 2,
        NoiseCase::III => 3,
    }
}

#[derive(Debug, Clone)]
struct TrialOutcome {
    errors: Vec<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub noise_case: NoiseCase,
    pub snr_db: f64,
    pub n_snapshots: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    /// RMSE over the trials that ran; `None` when the cell failed.
    pub rmse: Option<RmseSummary>,
    /// Signed matched errors (estimate - truth) per successful trial, in
    /// scenario order.
    pub errors: Vec<Vec<f64>>,
    pub mean_iterations: Option<f64>,
    pub converged_fraction: Option<f64>,
    /// First failure message, if any.
    pub first_failure: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.rmse.is_none()
    }

    pub fn rmse_deg(&self) -> f64 {
        self.rmse.as_ref().map_or(f64::NAN, |r| r.rmse_deg)
    }

    pub fn std_error(&self) -> f64 {
        self.rmse.as_ref().map_or(f64::NAN, |r| r.std_error())
    }

    /// Fraction of successful trials whose estimate for source `k` lies
    /// within `tol_deg` of the truth.
    pub fn fraction_within(&self, k: usize, tol_deg: f64) -> f64 {
        if self.errors.is_empty() {
            return 0.0;
        }
        let hits = self.errors.iter().filter(|e| e[k].abs() <= tol_deg).count();
        hits as f64 / self.errors.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub cells: Vec<CellResult>,
}

impl BenchmarkReport {
    pub fn cell(&self, method: Method, case: NoiseCase, snr_db: f64, n_snapshots: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.method == method && c.noise_case == case && c.snr_db == snr_db && c.n_snapshots == n_snapshots
        })
    }

    /// `(snr_db, rmse_deg)` for one method, ascending in SNR.
    pub fn rmse_series(&self, method: Method, case: NoiseCase, n_snapshots: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self
            .cells
            .iter()
            .filter(|c| c.method == method && c.noise_case == case && c.n_snapshots == n_snapshots)
            .map(|c| (c.snr_db, c.rmse_deg()))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    pub fn failed_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.failed())
    }

    pub fn rmse_rows(&self) -> Vec<RmseRow> {
        self.cells
            .iter()
            .map(|c| RmseRow {
                method: c.method.name().to_string(),
                noise_case: c.noise_case.label().to_string(),
                snr_db: c.snr_db,
                n_snapshots: c.n_snapshots,
                n_trials: c.n_trials,
                rmse_deg: c.rmse_deg(),
            })
            .collect()
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = format!(
            "# hetdoa diagnostics v{CSV_SCHEMA_VERSION}\n\
             method,noise_case,snr_db,n_snapshots,n_trials,n_failed,rmse_std_error,mean_iterations,converged_fraction,first_failure\n"
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},\"{}\"\n",
                c.method,
                c.noise_case.label(),
                c.snr_db,
                c.n_snapshots,
                c.n_trials,
                c.n_failed,
                c.std_error(),
                opt(c.mean_iterations),
                opt(c.converged_fraction),
                c.first_failure.as_deref().unwrap_or("").replace('"', "'"),
            ));
        }
        out
    }

    /// Writes `rmse.csv`, `diagnostics.csv` and `rmse.gp` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        put("rmse.csv", rmse_csv(&self.rmse_rows()))?;
        put("diagnostics.csv", self.diagnostics_csv())?;
        let mut groups: Vec<(NoiseCase, usize)> =
            self.cells.iter().map(|c| (c.noise_case, c.n_snapshots)).collect();
        groups.dedup();
        groups.sort();
        groups.dedup();
        let mut methods: Vec<Method> = self.cells.iter().map(|c| c.method).collect();
        methods.sort();
        methods.dedup();
        put("rmse.gp", plot::rmse_script("rmse.csv", &groups, &methods))?;
        Ok(written)
    }
}

/// Monte Carlo sweep over every (noise case, SNR, L) cell of the config.
/// Each trial draws one realization that every method then sees. Trials run
/// on the current rayon pool; results do not depend on the pool size.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let dict = config.dictionary()?;
    let settings = config.solver_settings();
    let k = config.n_sources();
    let snrs = config.noise.snr_values()?;

    let mut data_cells = Vec::new();
    for &case in &config.noise.cases {
        for &l in &config.snapshots {
            for &snr in &snrs {
                data_cells.push((case, snr, l));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..data_cells.len())
        .flat_map(|c| (0..config.n_trials).map(move |t| (c, t)))
        .collect();

    let outcomes: Vec<Vec<std::result::Result<TrialOutcome, String>>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (case, snr, l) = data_cells[c];
            let seed = trial_seed(config.base_seed, case, snr, l, t);
            let sim = match simulate(&dict, &config.scenario, &config.noise.spec(case, snr), l, seed) {
                Ok(s) => s,
                Err(e) => return vec![Err(e.to_string()); config.methods.len()],
            };
            config
                .methods
                .iter()
                .map(|&m| {
                    let out = run_method(m, &sim.snapshots, &dict, k, &settings).map_err(|e| e.to_string())?;
                    let errors = matched_errors(&out.estimate.angles_deg, &config.scenario.doas_deg)
                        .map_err(|e| e.to_string())?;
                    Ok(TrialOutcome {
                        errors,
                        iterations: out.sbl.as_ref().map(|r| r.iterations),
                        converged: out.sbl.as_ref().map(|r| r.converged),
                    })
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (c, &(case, snr, l)) in data_cells.iter().enumerate() {
        let trials = &outcomes[c * config.n_trials..(c + 1) * config.n_trials];
        for (mi, &method) in config.methods.iter().enumerate() {
            cells.push(summarize(method, case, snr, l, trials.iter().map(|t| &t[mi])));
        }
    }
    for cell in cells.iter().filter(|c| c.n_failed > 0) {
        log::warn!(
            "{} case {} SNR {} L {}: {} of {} trials failed ({})",
            cell.method,
            cell.noise_case,
            cell.snr_db,
            cell.n_snapshots,
            cell.n_failed,
            cell.n_trials,
            cell.first_failure.as_deref().unwrap_or("")
        );
    }
    Ok(BenchmarkReport { cells })
}

fn summarize<'a>(
    method: Method,
    case: NoiseCase,
    snr_db: f64,
    n_snapshots: usize,
    trials: impl Iterator<Item = &'a std::result::Result<TrialOutcome, String>>,
) -> CellResult {
    let mut ok = Vec::new();
    let mut n_trials = 0;
    let mut first_failure = None;
    for t in trials {
        n_trials += 1;
        match t {
            Ok(o) => ok.push(o),
            Err(e) => {
                first_failure.get_or_insert_with(|| e.clone());
            }
        }
    }
    let n_failed = n_trials - ok.len();
    let failed = ok.is_empty() || n_failed as f64 > MAX_FAILED_FRACTION * n_trials as f64;
    let rmse = (!failed).then(|| {
        RmseSummary::from_trial_mse(
            ok.iter()
                .map(|o| o.errors.iter().map(|e| e * e).sum::<f64>() / o.errors.len() as f64)
                .collect(),
        )
    });
    let iters: Vec<usize> = ok.iter().filter_map(|o| o.iterations).collect();
    let conv: Vec<bool> = ok.iter().filter_map(|o| o.converged).collect();
    CellResult {
        method,
        noise_case: case,
        snr_db,
        n_snapshots,
        n_trials,
        n_failed,
        rmse,
        errors: ok.iter().map(|o| o.errors.clone()).collect(),
        mean_iterations: (!iters.is_empty()).then(|| iters.iter().sum::<usize>() as f64 / iters.len() as f64),
        converged_fraction: (!conv.is_empty())
            .then(|| conv.iter().filter(|c| **c).count() as f64 / conv.len() as f64),
        first_failure,
    }
}
