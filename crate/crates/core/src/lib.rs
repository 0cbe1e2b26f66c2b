//! Normalizing-constant estimation by annealing.
//!
//! Estimates Z = ∫ e^{−V(x)} dx with thermodynamic integration, annealed
//! importance sampling, Jarzynski-type work averages and reverse-diffusion
//! samplers, and measures curves of measures in Wasserstein space.
//!
//! ```
//! use annealz::{estimators, rng::RunSeed, scores, targets};
//!
//! let target = targets::make_gaussian(2, &[], 1.0).unwrap();
//! let score = scores::ScoreEstimator::new(&target, scores::ScoreConfig::Exact).unwrap();
//! let counter = targets::OracleCounter::new();
//! let report = estimators::estimate_rds(
//!     &target,
//!     &estimators::RdsConfig::default(),
//!     &score,
//!     256,
//!     RunSeed::new(1, 0),
//!     &counter,
//! )
//! .unwrap();
//! let ratio = report.z_hat() / target.known_log_z.unwrap().exp();
//! assert!((ratio - 1.0).abs() < 0.1);
//! ```

pub mod curves;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod kernels;
pub mod metrics;
pub mod quadrature;
pub mod rng;
pub mod scores;
pub mod targets;

pub use error::{Error, Result};
