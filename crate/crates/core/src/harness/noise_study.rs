use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::benchmark::{trial_seed, MAX_FAILED_FRACTION};
use super::config::ExperimentConfig;
use super::plot;
use crate::error::{DoaError, Result};
use crate::io::CSV_SCHEMA_VERSION;
use crate::methods::Method;
use crate::metrics::{histogram, Histogram};
use crate::sbl::sbl_run_observed;
use crate::synthesis::{simulate, NoiseCase};

/// Histogram range of the variance ratio.
pub const RATIO_EDGES: (f64, f64, usize) = (0.0, 3.0, 30);

/// Per-iteration variance ratios of one estimator, pooled over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStudy {
    pub method: Method,
    /// `ratios[j]` holds `sigma2_est / sigma2_true` for every snapshot of
    /// every trial after iteration `j + 1`. Trials that stopped earlier
    /// contribute their final values.
    pub ratios: Vec<Vec<f64>>,
    pub n_trials: usize,
    pub n_failed: usize,
}

impl EstimatorStudy {
    pub fn mean_trace(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| mean(r)).collect()
    }

    /// Mean ratio at the last iteration.
    pub fn converged_mean(&self) -> f64 {
        self.ratios.last().map_or(f64::NAN, |r| mean(r))
    }

    pub fn histograms(&self) -> Result<Vec<Histogram>> {
        let edges = Histogram::uniform_edges(RATIO_EDGES.0, RATIO_EDGES.1, RATIO_EDGES.2);
        self.ratios.iter().map(|r| histogram(r, &edges)).collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudyCell {
    pub snr_db: f64,
    pub n_snapshots: usize,
    pub estimators: Vec<EstimatorStudy>,
}

impl NoiseStudyCell {
    pub fn estimator(&self, method: Method) -> Option<&EstimatorStudy> {
        self.estimators.iter().find(|e| e.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudyReport {
    pub cells: Vec<NoiseStudyCell>,
}

impl NoiseStudyReport {
    pub fn trace_csv(&self) -> String {
        let mut out = format!(
            "# hetdoa noise-trace v{CSV_SCHEMA_VERSION}\nmethod,snr_db,n_snapshots,iteration,mean_ratio,n_values\n"
        );
        for c in &self.cells {
            for e in &c.estimators {
                for (j, r) in e.ratios.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        e.method,
                        c.snr_db,
                        c.n_snapshots,
                        j + 1,
                        mean(r),
                        r.len()
                    ));
                }
            }
        }
        out
    }

    pub fn histogram_csv(&self) -> Result<String> {
        let mut out = format!(
            "# hetdoa noise-histogram v{CSV_SCHEMA_VERSION}\nmethod,snr_db,n_snapshots,iteration,bin_lo,bin_hi,count\n"
        );
        for c in &self.cells {
            for e in &c.estimators {
                for (j, h) in e.histograms()?.iter().enumerate() {
                    let mut row = |lo: f64, hi: f64, n: usize| {
                        out.push_str(&format!(
                            "{},{},{},{},{lo},{hi},{n}\n",
                            e.method,
                            c.snr_db,
                            c.n_snapshots,
                            j + 1
                        ));
                    };
                    row(f64::NEG_INFINITY, h.edges[0], h.underflow);
                    for (b, n) in h.counts.iter().enumerate() {
                        row(h.edges[b], h.edges[b + 1], *n);
                    }
                    row(*h.edges.last().unwrap(), f64::INFINITY, h.overflow);
                }
            }
        }
        Ok(out)
    }

    /// Writes `noise_trace.csv`, `noise_histogram.csv` and `noise_trace.gp`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let files = [
            ("noise_trace.csv", self.trace_csv()),
            ("noise_histogram.csv", self.histogram_csv()?),
            ("noise_trace.gp", plot::noise_trace_script("noise_trace.csv")),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            fs::write(&p, body)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Tracks how the Case II noise estimates approach the true per-snapshot
/// variance, for SBL2 and its EM variant, on Case II data.
pub fn run_noise_study(config: &ExperimentConfig) -> Result<NoiseStudyReport> {
    config.validate()?;
    let methods: Vec<Method> = config
        .methods
        .iter()
        .copied()
        .filter(|m| matches!(m, Method::Sbl2 | Method::Sbl2Em))
        .collect();
    if !(methods.contains(&Method::Sbl2) && methods.contains(&Method::Sbl2Em)) {
        return Err(DoaError::Config(
            "the noise study needs both SBL2 and SBL2-EM in methods".into(),
        ));
    }
    if !config.noise.cases.contains(&NoiseCase::II) {
        return Err(DoaError::Config("the noise study runs on Case II data; add \"II\" to noise.cases".into()));
    }
    let snrs = config.noise.snr_values()?;
    if let Some(s) = snrs.iter().find(|s| !s.is_finite()) {
        return Err(DoaError::Config(format!(
            "variance ratios are undefined without noise (SNR {s} dB)"
        )));
    }
    let dict = config.dictionary()?;
    let settings = config.solver_settings();
    let k = config.n_sources();

    let mut cells = Vec::new();
    for &l in &config.snapshots {
        for &snr in &snrs {
            let per_trial: Vec<Vec<std::result::Result<Vec<Vec<f64>>, String>>> = (0..config.n_trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(config.base_seed, NoiseCase::II, snr, l, t);
                    let sim = match simulate(&dict, &config.scenario, &config.noise.spec(NoiseCase::II, snr), l, seed) {
                        Ok(s) => s,
                        Err(e) => return vec![Err(e.to_string()); methods.len()],
                    };
                    let truth = sim.noise_std().snapshot_variances();
                    methods
                        .iter()
                        .map(|m| {
                            let cfg = settings.config(k, m.noise_model().expect("SBL method"));
                            let mut trace = Vec::new();
                            sbl_run_observed(&sim.snapshots, &dict, &cfg, |s| {
                                let est = s.noise.snapshot_variances();
                                trace.push(est.iter().zip(&truth).map(|(e, t)| e / t).collect());
                            })
                            .map_err(|e| e.to_string())?;
                            Ok(trace)
                        })
                        .collect()
                })
                .collect();
            let estimators = methods
                .iter()
                .enumerate()
                .map(|(mi, &m)| pool_traces(m, per_trial.iter().map(|t| &t[mi])))
                .collect::<Result<Vec<_>>>()?;
            cells.push(NoiseStudyCell {
                snr_db: snr,
                n_snapshots: l,
                estimators,
            });
        }
    }
    Ok(NoiseStudyReport { cells })
}

fn pool_traces<'a>(
    method: Method,
    trials: impl Iterator<Item = &'a std::result::Result<Vec<Vec<f64>>, String>>,
) -> Result<EstimatorStudy> {
    let mut ok: Vec<&Vec<Vec<f64>>> = Vec::new();
    let mut n_trials = 0;
    let mut first_err = None;
    for t in trials {
        n_trials += 1;
        match t {
            Ok(tr) if !tr.is_empty() => ok.push(tr),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert_with(|| e.clone());
            }
        }
    }
    let n_failed = n_trials - ok.len();
    if ok.is_empty() || n_failed as f64 > MAX_FAILED_FRACTION * n_trials as f64 {
        return Err(DoaError::numeric(format!(
            "{method}: {n_failed} of {n_trials} noise-study trials failed ({})",
            first_err.unwrap_or_default()
        )));
    }
    let depth = ok.iter().map(|t| t.len()).max().unwrap_or(0);
    let ratios = (0..depth)
        .map(|j| {
            ok.iter()
                .flat_map(|t| t[j.min(t.len() - 1)].iter().copied())
                .collect()
        })
        .collect();
    Ok(EstimatorStudy {
        method,
        ratios,
        n_trials,
        n_failed,
    })
}
