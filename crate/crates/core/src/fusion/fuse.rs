use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::geodesic::geodesic_distance;
use crate::fusion::{GpsFix, RawCampaign, UwbRange};

/// Default half-width of the UWB influence window, seconds.
pub const DEFAULT_FUSION_WINDOW: f64 = 40.0;

/// Per-second TX-RX distances from GPS fixes taken at the same instants.
#[derive(Clone, Debug, PartialEq)]
pub struct GpsTrack {
    times: Vec<f64>,
    distances: Vec<f64>,
    /// Speed over `[times[k], times[k+1]]`, m/s.
    rx_speed: Vec<f64>,
    tx_speed: Vec<f64>,
}

impl GpsTrack {
    /// Pairs fixes with equal timestamps; unmatched fixes are ignored.
    pub fn new(gps_tx: &[GpsFix], gps_rx: &[GpsFix]) -> Result<Self> {
        let mut pairs = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < gps_tx.len() && j < gps_rx.len() {
            let (a, b) = (&gps_tx[i], &gps_rx[j]);
            if a.t == b.t {
                pairs.push((a, b));
                i += 1;
                j += 1;
            } else if a.t < b.t {
                i += 1;
            } else {
                j += 1;
            }
        }
        if pairs.is_empty() {
            return Err(Error::InsufficientData("no TX and RX GPS fixes share a timestamp".into()));
        }
        let mut track = Self {
            times: Vec::with_capacity(pairs.len()),
            distances: Vec::with_capacity(pairs.len()),
            rx_speed: Vec::new(),
            tx_speed: Vec::new(),
        };
        for (k, (tx, rx)) in pairs.iter().enumerate() {
            track.times.push(tx.t);
            track.distances.push(geodesic_distance(tx.point(), rx.point())?);
            if k > 0 {
                let (ptx, prx) = pairs[k - 1];
                let dt = tx.t - ptx.t;
                track.tx_speed.push(geodesic_distance(ptx.point(), tx.point())? / dt);
                track.rx_speed.push(geodesic_distance(prx.point(), rx.point())? / dt);
            }
        }
        Ok(track)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.span();
        t >= a && t <= b
    }

    /// Linearly interpolated distance; queries outside the fix span fail.
    pub fn distance_at(&self, t: f64) -> Result<f64> {
        let (start, end) = self.span();
        if !self.contains(t) {
            return Err(Error::OutOfSpan { t, start, end });
        }
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 || self.times[k - 1] == t {
            return Ok(self.distances[k.saturating_sub(1)]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (d0, d1) = (self.distances[k - 1], self.distances[k]);
        Ok(d0 + (d1 - d0) * (t - t0) / (t1 - t0))
    }

    /// `(v_rx, v_tx)` ground speeds over the fix interval containing `t`.
    pub fn speeds_at(&self, t: f64) -> (f64, f64) {
        if self.rx_speed.is_empty() {
            return (0.0, 0.0);
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, self.rx_speed.len()) - 1;
        (self.rx_speed[k], self.tx_speed[k])
    }
}

/// GPS distance at `t_query`, interpolated between time-matched fixes.
pub fn interpolate_gps_distance(gps_tx: &[GpsFix], gps_rx: &[GpsFix], t_query: f64) -> Result<f64> {
    GpsTrack::new(gps_tx, gps_rx)?.distance_at(t_query)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrectedUwb {
    pub valid: Vec<UwbRange>,
    /// Observations whose corrected range came out negative; kept with the
    /// corrected value.
    pub dropped: Vec<UwbRange>,
}

/// Subtracts the cable bias from every reported range.
pub fn correct_uwb(uwb: &[UwbRange], cable_bias: f64) -> Result<CorrectedUwb> {
    if !(cable_bias >= 0.0 && cable_bias.is_finite()) {
        return Err(Error::domain(format!("cable bias must be >= 0, got {cable_bias}")));
    }
    let mut out = CorrectedUwb::default();
    for u in uwb {
        let c = UwbRange { t: u.t, range: u.range - cable_bias };
        if c.range < 0.0 {
            out.dropped.push(c);
        } else {
            out.valid.push(c);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DistanceSource {
    Fused,
    GpsOnly,
}

impl DistanceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceSource::Fused => "FUSED",
            DistanceSource::GpsOnly => "GPS_ONLY",
        }
    }
}

impl std::str::FromStr for DistanceSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FUSED" => Ok(DistanceSource::Fused),
            "GPS_ONLY" => Ok(DistanceSource::GpsOnly),
            other => Err(Error::domain(format!("unknown distance source {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusedDistance {
    pub d: f64,
    pub source: DistanceSource,
}

/// Query object combining the GPS track with bias-corrected UWB ranges.
///
/// Each UWB range at `t_u` yields a correction `c_u = d_uwb(t_u) − d_gps(t_u)`.
/// At a query time `t` the corrections within `±window` are averaged with
/// weights
///
/// ```text
/// w_u = max(0, 1 − |Δt|/W) / (σ_uwb² + σ_gps² (Δt/W)²)
/// ```
///
/// and the mean correction `c̄` is combined with the GPS estimate by inverse
/// variance: `d = d_gps + c̄ · P / (P + 1/σ_gps²)` with `P = Σ w_u`. The
/// `(Δt/W)²` term inflates the variance of stale corrections as the GPS
/// error they captured drifts away.
#[derive(Clone, Debug)]
pub struct DistanceFuser {
    track: GpsTrack,
    /// `(t_u, c_u)` in time order.
    corrections: Vec<(f64, f64)>,
    dropped: usize,
    window: f64,
    gps_var: f64,
    uwb_var: f64,
}

impl DistanceFuser {
    pub fn new(raw: &RawCampaign, window: f64) -> Result<Self> {
        raw.validate()?;
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::domain(format!("fusion window must be > 0, got {window}")));
        }
        let track = GpsTrack::new(&raw.gps_tx, &raw.gps_rx)?;
        let uwb = correct_uwb(&raw.uwb, raw.uwb_cable_bias)?;
        let corrections = uwb
            .valid
            .iter()
            .filter(|u| track.contains(u.t))
            .map(|u| Ok((u.t, u.range - track.distance_at(u.t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            track,
            corrections,
            dropped: uwb.dropped.len(),
            window,
            gps_var: raw.gps_sigma * raw.gps_sigma,
            uwb_var: raw.uwb_sigma * raw.uwb_sigma,
        })
    }

    pub fn track(&self) -> &GpsTrack {
        &self.track
    }

    /// UWB observations discarded by the bias correction.
    pub fn dropped_uwb(&self) -> usize {
        self.dropped
    }

    pub fn fuse(&self, t: f64) -> Result<FusedDistance> {
        let d_gps = self.track.distance_at(t)?;
        let lo = self.corrections.partition_point(|c| c.0 < t - self.window);
        let hi = self.corrections.partition_point(|c| c.0 <= t + self.window);
        let (mut p, mut wc) = (0.0, 0.0);
        for &(t_u, c) in &self.corrections[lo..hi] {
            let r = (t - t_u).abs() / self.window;
            let tri = 1.0 - r;
            if tri <= 0.0 {
                continue;
            }
            let w = tri / (self.uwb_var + self.gps_var * r * r);
            if w.is_finite() && w > 0.0 {
                p += w;
                wc += w * c;
            }
        }
        if !(p > 0.0) {
            return Ok(FusedDistance { d: d_gps, source: DistanceSource::GpsOnly });
        }
        let gain = p / (p + 1.0 / self.gps_var);
        Ok(FusedDistance { d: d_gps + gain * (wc / p), source: DistanceSource::Fused })
    }
}

/// One-shot [`DistanceFuser`] query.
pub fn fuse_distance(raw: &RawCampaign, window: f64, t_query: f64) -> Result<FusedDistance> {
    DistanceFuser::new(raw, window)?.fuse(t_query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{RfSample, WGS84_A};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Equatorial fix `x` meters east of the origin.
    fn fix(t: f64, x: f64) -> GpsFix {
        GpsFix { t, lat: 0.0, lon: (x / WGS84_A).to_degrees() }
    }

    fn raw(dists: &[(f64, f64)], uwb: Vec<UwbRange>) -> RawCampaign {
        RawCampaign {
            rf_samples: vec![RfSample { t: dists[0].0, path_loss: 80.0 }],
            gps_tx: dists.iter().map(|&(t, d)| fix(t, d)).collect(),
            gps_rx: dists.iter().map(|&(t, _)| fix(t, 0.0)).collect(),
            uwb,
            uwb_cable_bias: 5.0,
            gps_sigma: 5.4,
            uwb_sigma: 0.036,
        }
    }

    #[test]
    fn midpoint_interpolation() {
        let r = raw(&[(10.0, 100.0), (11.0, 110.0)], vec![]);
        let d = interpolate_gps_distance(&r.gps_tx, &r.gps_rx, 10.5).unwrap();
        assert!((d - 105.0).abs() < 1e-6, "{d}");
        let exact = interpolate_gps_distance(&r.gps_tx, &r.gps_rx, 11.0).unwrap();
        assert!((exact - 110.0).abs() < 1e-6);
    }

    #[test]
    fn extrapolation_is_an_error() {
        let r = raw(&[(10.0, 100.0), (11.0, 110.0)], vec![]);
        assert!(matches!(
            interpolate_gps_distance(&r.gps_tx, &r.gps_rx, 11.5),
            Err(Error::OutOfSpan { start, end, .. }) if start == 10.0 && end == 11.0
        ));
        assert!(interpolate_gps_distance(&r.gps_tx, &r.gps_rx, 9.0).is_err());
    }

    #[test]
    fn pairs_only_matching_timestamps() {
        let tx = vec![fix(0.0, 50.0), fix(1.0, 60.0), fix(2.0, 70.0)];
        let rx = vec![fix(1.0, 0.0), fix(2.0, 0.0), fix(3.0, 0.0)];
        let track = GpsTrack::new(&tx, &rx).unwrap();
        assert_eq!(track.times(), &[1.0, 2.0]);
        assert!(GpsTrack::new(&tx[..1], &rx[1..]).is_err());
    }

    #[test]
    fn speeds_from_fixes() {
        let tx = vec![fix(0.0, 50.0), fix(1.0, 62.0), fix(2.0, 74.0)];
        let rx = vec![fix(0.0, 0.0), fix(1.0, 10.0), fix(2.0, 20.0)];
        let track = GpsTrack::new(&tx, &rx).unwrap();
        let (v_rx, v_tx) = track.speeds_at(1.5);
        assert!((v_rx - 10.0).abs() < 1e-6 && (v_tx - 12.0).abs() < 1e-6);
    }

    #[test]
    fn stationary_cars_constant_distance() {
        let r = raw(&(0..10).map(|t| (t as f64, 42.0)).collect::<Vec<_>>(), vec![]);
        let track = GpsTrack::new(&r.gps_tx, &r.gps_rx).unwrap();
        let first = track.distance_at(0.0).unwrap();
        for k in 0..90 {
            assert_eq!(track.distance_at(k as f64 * 0.1).unwrap(), first);
        }
    }

    #[test]
    fn cable_bias_correction() {
        let c = correct_uwb(&[UwbRange { t: 0.0, range: 49.0 }, UwbRange { t: 1.0, range: 3.0 }], 5.0).unwrap();
        assert_eq!(c.valid, vec![UwbRange { t: 0.0, range: 44.0 }]);
        assert_eq!(c.dropped, vec![UwbRange { t: 1.0, range: -2.0 }]);
        let same = correct_uwb(&[UwbRange { t: 0.0, range: 49.0 }], 0.0).unwrap();
        assert_eq!(same.valid[0].range, 49.0);
        assert!(correct_uwb(&[], -1.0).is_err());
    }

    #[test]
    fn single_fresh_uwb_dominates() {
        // GPS reads 60 m, UWB says 44 m at the query instant
        let r = raw(&[(0.0, 60.0), (1.0, 60.0), (2.0, 60.0)], vec![UwbRange { t: 1.0, range: 49.0 }]);
        let f = fuse_distance(&r, 40.0, 1.0).unwrap();
        assert_eq!(f.source, DistanceSource::Fused);
        assert!((f.d - 44.0).abs() < 2.0 * 0.036, "{}", f.d);
    }

    #[test]
    fn no_uwb_in_window_is_gps_only() {
        let pts: Vec<(f64, f64)> = (0..200).map(|t| (t as f64, 30.0 + t as f64)).collect();
        let r = raw(&pts, vec![UwbRange { t: 0.0, range: 40.0 }]);
        let fuser = DistanceFuser::new(&r, 40.0).unwrap();
        let f = fuser.fuse(100.5).unwrap();
        assert_eq!(f.source, DistanceSource::GpsOnly);
        assert_eq!(f.d, fuser.track().distance_at(100.5).unwrap());
        // the window edge itself carries zero weight
        assert_eq!(fuser.fuse(40.0).unwrap().source, DistanceSource::GpsOnly);
        assert_eq!(fuser.fuse(39.9).unwrap().source, DistanceSource::Fused);
    }

    #[test]
    fn infinite_uwb_sigma_is_gps_only() {
        let pts: Vec<(f64, f64)> = (0..20).map(|t| (t as f64, 30.0 + t as f64)).collect();
        let uwb = (0..60).map(|k| UwbRange { t: k as f64 * 0.3, range: 40.0 }).collect();
        let mut r = raw(&pts, uwb);
        r.uwb_sigma = f64::INFINITY;
        let fuser = DistanceFuser::new(&r, 40.0).unwrap();
        for k in 0..190 {
            let t = k as f64 * 0.1;
            let f = fuser.fuse(t).unwrap();
            assert_eq!(f.d, interpolate_gps_distance(&r.gps_tx, &r.gps_rx, t).unwrap());
            assert_eq!(f.source, DistanceSource::GpsOnly);
        }
    }

    #[test]
    fn unbiased_with_exact_gps() {
        let truth = |t: f64| 20.0 + 0.5 * t;
        let pts: Vec<(f64, f64)> = (0..=300).map(|t| (t as f64, truth(t as f64))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noise = Normal::new(0.0, 0.036).unwrap();
        let uwb = (0..1050)
            .map(|k| {
                let t = k as f64 / 3.5;
                UwbRange { t, range: truth(t) + 5.0 + noise.sample(&mut rng) }
            })
            .collect();
        let fuser = DistanceFuser::new(&raw(&pts, uwb), 40.0).unwrap();
        let n = 100_000;
        let bias = (0..n)
            .map(|i| {
                let t = 300.0 * i as f64 / n as f64;
                fuser.fuse(t).unwrap().d - truth(t)
            })
            .sum::<f64>()
            / n as f64;
        assert!(bias.abs() < 0.05, "{bias}");
    }

    #[test]
    fn output_is_continuous() {
        let pts: Vec<(f64, f64)> = (0..=100).map(|t| (t as f64, 50.0 + 3.0 * (t as f64 / 7.0).sin())).collect();
        let uwb = (0..350).map(|k| UwbRange { t: k as f64 / 3.5, range: 57.0 + (k % 5) as f64 * 0.01 }).collect();
        let fuser = DistanceFuser::new(&raw(&pts, uwb), 40.0).unwrap();
        let h = 1e-3;
        let mut prev = fuser.fuse(0.0).unwrap().d;
        for k in 1..100_000 {
            let d = fuser.fuse(k as f64 * h).unwrap().d;
            assert!((d - prev).abs() < 0.01, "jump at {}", k as f64 * h);
            prev = d;
        }
    }
}
