//! Peak picking, matching of estimates to true DOAs, RMSE and histograms.

use serde::{Deserialize, Serialize};

use crate::beamform::Spectrum;
use crate::error::{DoaError, Result};
use crate::sbl::select_peaks;
use crate::synthesis::SourceScenario;

/// Exhaustive assignment is used up to this many sources.
pub const MAX_EXHAUSTIVE_K: usize = 5;

/// K estimated DOAs (ascending) from one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaEstimate {
    pub angles_deg: Vec<f64>,
    pub method_tag: String,
}

impl DoaEstimate {
    pub fn new(mut angles_deg: Vec<f64>, method_tag: impl Into<String>) -> Self {
        angles_deg.sort_by(f64::total_cmp);
        Self {
            angles_deg,
            method_tag: method_tag.into(),
        }
    }
}

/// The `k` largest local maxima of a spectrum, as grid angles.
pub fn find_peaks(spectrum: &Spectrum, k: usize) -> Result<DoaEstimate> {
    if k > spectrum.grid.len() {
        return Err(DoaError::invalid(format!(
            "asked for {k} peaks on a grid of {}",
            spectrum.grid.len()
        )));
    }
    let angles = select_peaks(&spectrum.values, k)
        .into_iter()
        .map(|m| spectrum.grid.angle(m))
        .collect();
    Ok(DoaEstimate::new(angles, spectrum.method_tag.clone()))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Signed errors `estimate - truth` in the order of `truth`, after pairing
/// estimates to true DOAs with minimum total squared error.
pub fn matched_errors(estimate: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    let k = truth.len();
    if estimate.len() != k {
        return Err(DoaError::invalid(format!(
            "{} estimates for {k} true DOAs",
            estimate.len()
        )));
    }
    if k <= MAX_EXHAUSTIVE_K {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for perm in permutations(k) {
            let cost: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, p)| (estimate[*p] - truth[i]).powi(2))
                .sum();
            if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                best = Some((cost, perm));
            }
        }
        let (_, perm) = best.expect("at least one permutation");
        Ok(perm
            .iter()
            .enumerate()
            .map(|(i, p)| estimate[*p] - truth[i])
            .collect())
    } else {
        // Sorted pairing is optimal for squared error on a line.
        let mut order_t: Vec<usize> = (0..k).collect();
        order_t.sort_by(|a, b| truth[*a].total_cmp(&truth[*b]));
        let mut est = estimate.to_vec();
        est.sort_by(f64::total_cmp);
        let mut out = vec![0.0; k];
        for (rank, i) in order_t.iter().enumerate() {
            out[*i] = est[rank] - truth[*i];
        }
        Ok(out)
    }
}

/// RMSE over a set of trials plus the per-trial mean squared errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseSummary {
    pub rmse_deg: f64,
    pub n_trials: usize,
    pub trial_mse: Vec<f64>,
}

impl RmseSummary {
    pub fn from_trial_mse(trial_mse: Vec<f64>) -> Self {
        let n = trial_mse.len().max(1);
        let rmse = (trial_mse.iter().sum::<f64>() / n as f64).sqrt();
        Self {
            rmse_deg: rmse,
            n_trials: trial_mse.len(),
            trial_mse,
        }
    }

    /// Delta-method standard error of the RMSE.
    pub fn std_error(&self) -> f64 {
        let n = self.trial_mse.len();
        if n < 2 || self.rmse_deg == 0.0 {
            return 0.0;
        }
        let mean = self.trial_mse.iter().sum::<f64>() / n as f64;
        let var = self
            .trial_mse
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt() / (2.0 * self.rmse_deg)
    }
}

/// `sqrt(sum_trials sum_i (est - true)^2 / (n_trials * K))` with optimal
/// pairing inside each trial.
pub fn match_and_rmse(estimates: &[DoaEstimate], truth: &SourceScenario) -> Result<RmseSummary> {
    if estimates.is_empty() {
        return Err(DoaError::invalid("no trials to score"));
    }
    let k = truth.n_sources() as f64;
    let trial_mse = estimates
        .iter()
        .map(|e| {
            matched_errors(&e.angles_deg, &truth.doas_deg)
                .map(|errs| errs.iter().map(|x| x * x).sum::<f64>() / k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RmseSummary::from_trial_mse(trial_mse))
}

/// Left-closed histogram with underflow and overflow bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub underflow: usize,
    pub counts: Vec<usize>,
    pub overflow: usize,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.underflow + self.overflow + self.counts.iter().sum::<usize>()
    }

    pub fn uniform_edges(lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
        (0..=n_bins)
            .map(|i| lo + (hi - lo) * i as f64 / n_bins as f64)
            .collect()
    }
}

/// Bins `values` into `[e_i, e_{i+1})`; values below the first edge go to
/// underflow, values at or above the last edge to overflow.
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DoaError::invalid("histogram edges must be increasing"));
    }
    let mut h = Histogram {
        edges: edges.to_vec(),
        underflow: 0,
        counts: vec![0; edges.len() - 1],
        overflow: 0,
    };
    for v in values {
        if *v < edges[0] || v.is_nan() {
            h.underflow += 1;
        } else if *v >= edges[edges.len() - 1] {
            h.overflow += 1;
        } else {
            let bin = edges.partition_point(|e| e <= v) - 1;
            h.counts[bin] += 1;
        }
    }
    Ok(h)
}
