//! Synthetic campaigns: path loss from any model plus exponentially
//! correlated shadowing along a configurable trajectory, and regeneration
//! of the raw GPS/UWB streams with realistic sensor errors.

mod campaign;
mod corrupt;
mod process;
mod trajectory;

pub use campaign::simulate_campaign;
pub use corrupt::{corrupt_distances, CorruptionConfig};
pub use process::ShadowingProcess;
pub use trajectory::{DistanceProfile, Schedule, TrajectorySpec};
