//! GPS and UWB inter-vehicle distance: geodesic distances between
//! time-matched GPS fixes, UWB cable-bias correction and the windowed
//! combination of both.

mod fuse;
mod geodesic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fuse::{
    correct_uwb, fuse_distance, interpolate_gps_distance, CorrectedUwb, DistanceFuser, DistanceSource, FusedDistance,
    GpsTrack, DEFAULT_FUSION_WINDOW,
};
pub use geodesic::{geodesic_distance, GeoPoint, WGS84_A, WGS84_F};

/// Default UWB cable bias, meters.
pub const DEFAULT_UWB_BIAS: f64 = 5.0;
/// Default GPS distance error standard deviation, meters.
pub const DEFAULT_GPS_SIGMA: f64 = 5.4;
/// Default UWB range error standard deviation, meters.
pub const DEFAULT_UWB_SIGMA: f64 = 0.036;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
}

impl GpsFix {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UwbRange {
    pub t: f64,
    /// Reported range, meters.
    pub range: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfSample {
    pub t: f64,
    pub path_loss: f64,
}

/// Raw sensor streams of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawCampaign {
    pub rf_samples: Vec<RfSample>,
    /// Fixes stamped at whole seconds; TX and RX pair by equal timestamps.
    pub gps_tx: Vec<GpsFix>,
    pub gps_rx: Vec<GpsFix>,
    pub uwb: Vec<UwbRange>,
    pub uwb_cable_bias: f64,
    pub gps_sigma: f64,
    pub uwb_sigma: f64,
}

impl RawCampaign {
    /// Checks that every stream is time-ordered and the error parameters are
    /// usable.
    pub fn validate(&self) -> Result<()> {
        fn ordered(name: &str, ts: impl Iterator<Item = f64>) -> Result<()> {
            let ts: Vec<f64> = ts.collect();
            if ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Domain(format!("{name} timestamps must be finite and increasing")));
            }
            Ok(())
        }
        ordered("rf", self.rf_samples.iter().map(|s| s.t))?;
        ordered("gps_tx", self.gps_tx.iter().map(|s| s.t))?;
        ordered("gps_rx", self.gps_rx.iter().map(|s| s.t))?;
        ordered("uwb", self.uwb.iter().map(|s| s.t))?;
        if !(self.uwb_cable_bias >= 0.0) || !(self.gps_sigma >= 0.0) || !(self.uwb_sigma >= 0.0) {
            return Err(Error::Domain("bias and error deviations must be >= 0".into()));
        }
        Ok(())
    }
}
