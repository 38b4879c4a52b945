//! Censored maximum-likelihood estimation, breakpoint sweeps and model
//! ranking by BIC and RMSE.

mod dataset;
mod fit;
mod likelihood;
pub mod normal;
pub mod simplex;

pub use dataset::{Dataset, MeasurementRecord};
pub use fit::{
    best_of_sweep, compare, fit, fit_with, sweep_breakpoint, sweep_breakpoint_with, Comparison, FitOptions, FitResult,
    SweepEntry,
};
pub use likelihood::{bic, censored_log_likelihood, rmse};
