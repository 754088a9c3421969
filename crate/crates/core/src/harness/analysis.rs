use crate::array::SteeringDictionary;
use crate::error::Result;
use crate::methods::SolverSettings;
use crate::sbl::{sbl_run, NoiseModel};
use crate::synthesis::{simulate, NoiseSpec, SourceScenario};

/// Highest SNR whose RMSE exceeds `threshold_deg` in an ascending
/// `(snr, rmse)` sweep. A failed cell (NaN) counts as broken. `None` if the
/// method never breaks inside the sweep.
pub fn breakdown_snr(series: &[(f64, f64)], threshold_deg: f64) -> Option<f64> {
    series
        .iter()
        .filter(|(_, r)| !(*r <= threshold_deg))
        .map(|(s, _)| *s)
        .max_by(f64::total_cmp)
}

/// True and SBL3-estimated noise standard deviations of one realization,
/// both divided by the SNR scale factor so the true values have mean 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDeviation {
    pub true_std: Vec<f64>,
    pub est_std: Vec<f64>,
}

impl NoiseDeviation {
    pub fn deviations(&self) -> Vec<f64> {
        self.est_std.iter().zip(&self.true_std).map(|(e, t)| e - t).collect()
    }

    pub fn mean_deviation(&self) -> f64 {
        let d = self.deviations();
        d.iter().sum::<f64>() / d.len() as f64
    }
}

/// Runs SBL3 on one Case III realization and compares the per-entry noise
/// standard deviations with the truth.
pub fn sbl3_noise_deviation(
    dict: &SteeringDictionary,
    scenario: &SourceScenario,
    noise: &NoiseSpec,
    n_snapshots: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<NoiseDeviation> {
    let sim = simulate(dict, scenario, noise, n_snapshots, seed)?;
    let res = sbl_run(
        &sim.snapshots,
        dict,
        &settings.config(scenario.n_sources(), NoiseModel::CaseIII),
    )?;
    let c = sim.noise_scale;
    let est = res.noise.std_devs();
    let truth = sim.noise_std().values();
    Ok(NoiseDeviation {
        true_std: truth.iter().map(|s| s / c).collect(),
        est_std: est.iter().map(|s| s / c).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_picks_highest_broken_snr() {
        let s = [(-20.0, 40.0), (-15.0, 12.0), (-10.0, 3.0), (-5.0, 11.0), (0.0, 0.1)];
        assert_eq!(breakdown_snr(&s, 10.0), Some(-5.0));
        assert_eq!(breakdown_snr(&s[..3], 10.0), Some(-15.0));
        assert_eq!(breakdown_snr(&[(-20.0, 1.0), (0.0, 0.0)], 10.0), None);
        assert_eq!(breakdown_snr(&[(-20.0, 1.0), (0.0, f64::NAN)], 10.0), Some(0.0));
    }
}
