use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathloss::LinkClass;

/// Piecewise-constant value over time, optionally repeating with `period`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    /// `(start time, value)` pairs in increasing start order.
    pub steps: Vec<(f64, T)>,
    #[serde(default)]
    pub period: Option<f64>,
}

impl<T: Copy> Schedule<T> {
    pub fn constant(value: T) -> Self {
        Self { steps: vec![(0.0, value)], period: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::domain("schedule has no steps"));
        }
        if self.steps.iter().any(|s| !s.0.is_finite()) || self.steps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain("schedule start times must be finite and increasing"));
        }
        if let Some(p) = self.period {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::domain(format!("schedule period must be > 0, got {p}")));
            }
        }
        Ok(())
    }

    /// Value in force at `t`; before the first step the first value applies.
    pub fn at(&self, t: f64) -> T {
        let t = match self.period {
            Some(p) => t.rem_euclid(p),
            None => t,
        };
        let i = self.steps.partition_point(|s| s.0 <= t).saturating_sub(1);
        self.steps[i].1
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.steps.iter().map(|s| s.1)
    }
}

/// Transmitter-receiver separation as a cyclic piecewise-linear function of
/// time. The cycle length is the time of the last waypoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    /// `(time s, distance m)` knots; the first must be at time zero.
    pub waypoints: Vec<(f64, f64)>,
}

/// Approach, pass through the far field and return, as fractions of the
/// cycle. Dwelling near the transmitter and crossing the far field quickly
/// keeps the censored share of a day campaign under ten percent.
const CAMPAIGN_SHAPE: [(f64, f64); 11] = [
    (0.0, 5.0),
    (60.0, 35.0),
    (150.0, 150.0),
    (240.0, 500.0),
    (270.0, 800.0),
    (285.0, 2000.0),
    (300.0, 800.0),
    (330.0, 500.0),
    (420.0, 150.0),
    (510.0, 35.0),
    (570.0, 5.0),
];

impl DistanceProfile {
    /// Linear sweep `d_min → d_max → d_min` over one `period`.
    pub fn triangle(d_min: f64, d_max: f64, period: f64) -> Self {
        Self { waypoints: vec![(0.0, d_min), (period / 2.0, d_max), (period, d_min)] }
    }

    /// Constant separation.
    pub fn fixed(d: f64) -> Self {
        Self { waypoints: vec![(0.0, d), (1.0, d)] }
    }

    /// Drive-by cycle between 5 m and 2 km lasting `period` seconds, with
    /// about a fifth of the time under 35 m.
    pub fn campaign(period: f64) -> Self {
        let k = period / CAMPAIGN_SHAPE[CAMPAIGN_SHAPE.len() - 1].0;
        Self { waypoints: CAMPAIGN_SHAPE.iter().map(|&(t, d)| (t * k, d)).collect() }
    }

    pub fn period(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].0
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.waypoints;
        if w.len() < 2 || w[0].0 != 0.0 {
            return Err(Error::domain("distance profile needs at least two waypoints starting at t = 0"));
        }
        if w.windows(2).any(|p| !(p[1].0 > p[0].0)) || !self.period().is_finite() {
            return Err(Error::domain("distance waypoint times must be finite and increasing"));
        }
        if let Some(&(_, d)) = w.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
            return Err(Error::domain(format!("distance waypoints must be positive, got {d}")));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let w = &self.waypoints;
        let t = t.rem_euclid(self.period());
        let i = w.partition_point(|p| p.0 <= t).clamp(1, w.len() - 1);
        let ((t0, d0), (t1, d1)) = (w[i - 1], w[i]);
        d0 + (d1 - d0) * (t - t0) / (t1 - t0)
    }
}

/// Sampling plan and kinematics of one simulated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub run_id: String,
    /// Seconds.
    pub duration: f64,
    /// Seconds between samples.
    #[serde(default = "default_sample_period")]
    pub sample_period: f64,
    pub distance: DistanceProfile,
    /// Signed receiver speed, m/s.
    pub v_rx: Schedule<f64>,
    /// Signed transmitter speed, m/s.
    pub v_tx: Schedule<f64>,
    #[serde(default = "default_link")]
    pub link: Schedule<LinkClass>,
}

fn default_sample_period() -> f64 {
    crate::shadowing::DEFAULT_TIME_SPACING
}

fn default_link() -> Schedule<LinkClass> {
    Schedule::constant(LinkClass::Los)
}

impl TrajectorySpec {
    /// Run of `duration` seconds on the campaign drive-by cycle, with both
    /// cars at `speed`.
    pub fn campaign(run_id: impl Into<String>, duration: f64, speed: f64) -> Self {
        Self {
            run_id: run_id.into(),
            duration,
            sample_period: default_sample_period(),
            distance: DistanceProfile::campaign(660.0),
            v_rx: Schedule::constant(speed),
            v_tx: Schedule::constant(speed),
            link: default_link(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::domain(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::domain(format!("sample period must be > 0, got {}", self.sample_period)));
        }
        self.distance.validate()?;
        self.v_rx.validate()?;
        self.v_tx.validate()?;
        self.link.validate()?;
        if self.v_rx.values().chain(self.v_tx.values()).any(|v| !v.is_finite()) {
            return Err(Error::domain("speeds must be finite"));
        }
        Ok(())
    }

    /// Number of samples: one at `t = 0` and every `sample_period` while
    /// `t < duration`.
    pub fn sample_count(&self) -> usize {
        ((self.duration / self.sample_period) + 1e-9).floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lookup() {
        let s = Schedule { steps: vec![(0.0, 1.0), (10.0, 2.0), (20.0, 3.0)], period: Some(30.0) };
        s.validate().unwrap();
        assert_eq!(s.at(0.0), 1.0);
        assert_eq!(s.at(9.999), 1.0);
        assert_eq!(s.at(10.0), 2.0);
        assert_eq!(s.at(29.0), 3.0);
        assert_eq!(s.at(31.0), 1.0);
        let once = Schedule { period: None, ..s };
        assert_eq!(once.at(1000.0), 3.0);
    }

    #[test]
    fn schedule_rejects_unsorted() {
        let s = Schedule { steps: vec![(0.0, 1.0), (0.0, 2.0)], period: None };
        assert!(s.validate().is_err());
        assert!(Schedule::<f64> { steps: vec![], period: None }.validate().is_err());
    }

    #[test]
    fn triangle_profile() {
        let p = DistanceProfile::triangle(5.0, 2000.0, 100.0);
        p.validate().unwrap();
        assert_eq!(p.at(0.0), 5.0);
        assert_eq!(p.at(50.0), 2000.0);
        assert!((p.at(25.0) - 1002.5).abs() < 1e-9);
        assert!((p.at(125.0) - 1002.5).abs() < 1e-9);
    }

    #[test]
    fn campaign_profile_extent() {
        let p = DistanceProfile::campaign(660.0);
        p.validate().unwrap();
        assert_eq!(p.period(), 660.0);
        let ds: Vec<f64> = (0..6600).map(|i| p.at(i as f64 * 0.1)).collect();
        let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ds.iter().cloned().fold(0.0, f64::max);
        assert_eq!((lo, hi), (5.0, 2000.0));
        let near = ds.iter().filter(|&&d| d < 35.0).count() as f64 / ds.len() as f64;
        assert!((0.15..0.3).contains(&near), "{near}");
    }

    #[test]
    fn sample_count_is_floor() {
        let mut t = TrajectorySpec::campaign("a", 660.0, 10.0);
        assert_eq!(t.sample_count(), 40_000);
        t.duration = 0.0165 * 3.5;
        assert_eq!(t.sample_count(), 3);
    }

    #[test]
    fn json_defaults() {
        let t: TrajectorySpec = serde_json::from_str(
            r#"{"run_id":"x","duration":10,"distance":{"waypoints":[[0,5],[10,50]]},
                "v_rx":{"steps":[[0,10]]},"v_tx":{"steps":[[0,12]]}}"#,
        )
        .unwrap();
        assert_eq!(t.sample_period, 0.0165);
        assert_eq!(t.link.at(3.0), LinkClass::Los);
        t.validate().unwrap();
    }
}
