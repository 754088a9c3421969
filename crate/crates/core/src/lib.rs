//! Grid-based direction-of-arrival estimation from multi-snapshot array
//! data under heteroscedastic Gaussian noise.
//!
//! The crate provides
//! - array geometry, DOA grids and steering dictionaries ([`array`]),
//! - synthetic data with three grades of noise heteroscedasticity ([`synthesis`]),
//! - the conventional beamformer, its pre-whitened variants and MUSIC ([`beamform`]),
//! - a sparse Bayesian learning solver with several noise estimators ([`sbl`]),
//! - peak picking and RMSE scoring ([`metrics`]),
//! - a seeded Monte Carlo harness with CSV output ([`harness`], [`io`]).
//!
//! ```
//! use hetdoa::prelude::*;
//!
//! let geom = ArrayGeometry::ula(20, 0.5).unwrap();
//! let grid = AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap();
//! let dict = build_dictionary(&geom, &grid);
//! let sim = simulate(
//!     &dict,
//!     &SourceScenario::single(-3.0, 0.0),
//!     &NoiseSpec::new(NoiseCase::III, 0.0),
//!     50,
//!     7,
//! )
//! .unwrap();
//! let res = sbl_run(&sim.snapshots, &dict, &SblConfig::new(1, NoiseModel::CaseIII)).unwrap();
//! assert_eq!(res.doas_deg(&dict), vec![-3.0]);
//! ```

pub mod array;
pub mod beamform;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod methods;
pub mod metrics;
pub mod sbl;
pub mod synthesis;

pub use error::{DoaError, Result};

pub mod prelude {
    pub use crate::array::{build_dictionary, steering_vector, AngularGrid, ArrayGeometry, SteeringDictionary};
    pub use crate::beamform::{
        cbf_spectrum, music_spectrum, prewhiten, sample_covariance, CovarianceMatrix, Spectrum,
    };
    pub use crate::error::{DoaError, Result};
    pub use crate::harness::{run_benchmark, run_noise_study, ExperimentConfig};
    pub use crate::methods::{run_method, Method, SolverSettings};
    pub use crate::metrics::{find_peaks, histogram, match_and_rmse, DoaEstimate};
    pub use crate::sbl::{sbl_run, GammaSpectrum, NoiseEstimate, NoiseModel, SblConfig, SblResult};
    pub use crate::synthesis::{
        simulate, NoiseCase, NoiseSpec, NoiseStdMatrix, SnapshotMatrix, SourceScenario,
    };
}
