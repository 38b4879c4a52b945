//! Shadowing residuals, autocorrelation over distance or time, the
//! exponential decorrelation fit, speed-bucketed decorrelation times and
//! shadowing spread versus distance.

mod acf;
mod buckets;
mod residuals;
mod sigma_bins;

pub use acf::{autocorrelation, fit_gudmundson, AutocorrEstimate};
pub use buckets::{bucketed_decorrelation, BucketConfig, SpeedBucketTable};
pub use residuals::{extract_residuals, resample_all, Domain, Grid, ResidualSample, ResidualSeries};
pub use sigma_bins::{sigma_vs_distance, write_sigma_bins_csv, SigmaBin};

/// Default distance-domain grid step, meters.
pub const DEFAULT_DISTANCE_SPACING: f64 = 0.5;
/// Default time-domain grid step, seconds.
pub const DEFAULT_TIME_SPACING: f64 = 0.0165;
/// Default longest distance lag, meters.
pub const DEFAULT_DISTANCE_MAX_LAG: f64 = 600.0;
/// Default longest time lag, seconds.
pub const DEFAULT_TIME_MAX_LAG: f64 = 30.0;
