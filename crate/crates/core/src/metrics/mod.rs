//! Sample-quality and estimate-quality metrics.

mod mmd;
mod stats;
mod transport;

use serde::{Deserialize, Serialize};

pub use mmd::{default_sigmas, mmd};
pub use stats::{ks_one_sample, kolmogorov_sf, mean_and_se, relative_error_stats, work_stats, KsResult, RelErrorStats, WorkStats};
pub use transport::{assignment, w2_empirical};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mmd: f64,
    pub w2: f64,
    pub z_ratio_mean: f64,
    pub z_ratio_std: f64,
    pub work_mean: f64,
    pub work_var: Option<f64>,
    pub n_x: usize,
    pub n_y: usize,
}
