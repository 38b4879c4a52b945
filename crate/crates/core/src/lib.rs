//! Vehicle-to-vehicle large-scale fading toolkit.
//!
//! * [`pathloss`]: single-slope, per-link-class and double-slope path loss
//!   models with lognormal shadowing.
//! * [`censored`]: maximum-likelihood fitting with right-censored samples,
//!   breakpoint sweeps and BIC ranking.
//! * [`shadowing`]: shadowing residuals, empirical autocorrelation and the
//!   exponential (Gudmundson) decorrelation fit.
//! * [`sim`]: synthetic campaigns with exponentially correlated shadowing.
//! * [`fusion`]: GPS and UWB inter-vehicle distance fusion.
//! * [`io`]: campaign CSV files, configuration and reports.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod censored;
pub mod commands;
pub mod error;
pub mod fusion;
pub mod io;
pub mod pathloss;
pub mod shadowing;
pub mod sim;

pub use error::{Error, Result};
