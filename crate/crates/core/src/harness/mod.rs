//! Monte Carlo experiments: configuration, RMSE sweeps, the noise-ratio
//! study and plot scripts.

mod analysis;
mod benchmark;
mod config;
mod noise_study;
pub mod plot;

pub use analysis::{breakdown_snr, sbl3_noise_deviation, NoiseDeviation};
pub use benchmark::{run_benchmark, trial_seed, BenchmarkReport, CellResult, MAX_FAILED_FRACTION};
pub use config::{ExperimentConfig, GeometryConfig, GridConfig, NoiseConfig, SblOverrides, SnrRange};
pub use noise_study::{run_noise_study, EstimatorStudy, NoiseStudyCell, NoiseStudyReport, RATIO_EDGES};

/// Runs `f` on a rayon pool with `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> crate::error::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| crate::error::DoaError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
