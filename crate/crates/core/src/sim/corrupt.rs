use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::censored::Dataset;
use crate::error::{Error, Result};
use crate::fusion::{GpsFix, RawCampaign, RfSample, UwbRange, DEFAULT_GPS_SIGMA, DEFAULT_UWB_BIAS, DEFAULT_UWB_SIGMA, WGS84_A};

/// Sensor error model used to turn a simulated run back into raw streams.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionConfig {
    /// GPS distance error standard deviation, meters.
    pub gps_sigma: f64,
    /// Time constant of the GPS error autocorrelation, seconds.
    pub gps_corr_time: f64,
    pub uwb_sigma: f64,
    /// UWB ranges are only reported at or below this distance, meters.
    pub uwb_range: f64,
    /// UWB reporting rate, Hz.
    pub uwb_rate: f64,
    /// Added to every reported UWB range, meters.
    pub uwb_bias: f64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            gps_sigma: DEFAULT_GPS_SIGMA,
            gps_corr_time: 10.0,
            uwb_sigma: DEFAULT_UWB_SIGMA,
            uwb_range: 100.0,
            uwb_rate: 3.5,
            uwb_bias: DEFAULT_UWB_BIAS,
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.gps_sigma) && ok(self.gps_corr_time) && ok(self.uwb_sigma) && ok(self.uwb_rate)) {
            return Err(Error::domain("GPS and UWB error parameters must be > 0"));
        }
        if !(self.uwb_range >= 0.0 && self.uwb_bias >= 0.0) {
            return Err(Error::domain("UWB range and bias must be >= 0"));
        }
        Ok(())
    }
}

/// Piecewise-linear lookup into `(t, v)` knots, clamped at both ends.
fn lookup(knots: &[(f64, f64)], t: f64) -> f64 {
    let k = knots.partition_point(|p| p.0 <= t);
    if k == 0 {
        return knots[0].1;
    }
    if k == knots.len() {
        return knots[k - 1].1;
    }
    let ((t0, v0), (t1, v1)) = (knots[k - 1], knots[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn east(x: f64) -> f64 {
    (x / WGS84_A).to_degrees()
}

/// Regenerates raw sensor streams for a single simulated run.
///
/// Both cars drive east along the equator, the receiver at its recorded
/// speed and the transmitter at the true separation ahead of it, so GPS
/// geodesic distances equal the separation plus the GPS error. The GPS
/// distance error is a stationary AR(1) sequence sampled at whole seconds;
/// UWB ranges carry white noise plus the cable bias.
pub fn corrupt_distances(data: &Dataset, cfg: &CorruptionConfig, seed: u64) -> Result<RawCampaign> {
    cfg.validate()?;
    let recs = data.records();
    if recs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.run_ids().len() != 1 {
        return Err(Error::domain("corrupt_distances takes a single run"));
    }

    let mut travel = 0.0;
    let mut prev_t = recs[0].t;
    let mut truth = Vec::with_capacity(recs.len());
    let mut rx_pos = Vec::with_capacity(recs.len());
    for r in recs {
        travel += r.v_rx.abs() * (r.t - prev_t);
        prev_t = r.t;
        truth.push((r.t, r.d));
        rx_pos.push((r.t, travel));
    }
    let (t_first, t_last) = (recs[0].t, recs[recs.len() - 1].t);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = (-1.0 / cfg.gps_corr_time).exp();
    let innovation = cfg.gps_sigma * (1.0 - rho * rho).sqrt();
    let z0: f64 = StandardNormal.sample(&mut rng);
    let mut err = cfg.gps_sigma * z0;
    let (mut gps_tx, mut gps_rx) = (Vec::new(), Vec::new());
    let mut second = t_first.floor();
    loop {
        let x_rx = lookup(&rx_pos, second);
        let x_tx = x_rx + lookup(&truth, second) + err;
        gps_rx.push(GpsFix { t: second, lat: 0.0, lon: east(x_rx) });
        gps_tx.push(GpsFix { t: second, lat: 0.0, lon: east(x_tx) });
        if second >= t_last {
            break;
        }
        second += 1.0;
        let eps: f64 = StandardNormal.sample(&mut rng);
        err = rho * err + innovation * eps;
    }

    let mut uwb = Vec::new();
    let period = 1.0 / cfg.uwb_rate;
    for k in 0.. {
        let t = t_first + k as f64 * period;
        if t > t_last {
            break;
        }
        let d = lookup(&truth, t);
        let eps: f64 = StandardNormal.sample(&mut rng);
        if d <= cfg.uwb_range {
            uwb.push(UwbRange { t, range: d + cfg.uwb_sigma * eps + cfg.uwb_bias });
        }
    }

    Ok(RawCampaign {
        rf_samples: recs.iter().map(|r| RfSample { t: r.t, path_loss: r.path_loss }).collect(),
        gps_tx,
        gps_rx,
        uwb,
        uwb_cable_bias: cfg.uwb_bias,
        gps_sigma: cfg.gps_sigma,
        uwb_sigma: cfg.uwb_sigma,
    })
}
