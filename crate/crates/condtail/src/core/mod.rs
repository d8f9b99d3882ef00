//! Shared vocabulary for the estimators: covariates and metrics, smoothing
//! kernels, bandwidths, level grids, and datasets.

pub mod covariate;
pub mod dataset;
pub mod kernel;
pub mod params;

pub use covariate::{Covariate, Metric};
pub use dataset::Dataset;
pub use kernel::{KernelK, KernelPair, KernelQ};
pub use params::{Bandwidths, TauGrid};
