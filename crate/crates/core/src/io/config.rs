use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathloss::{reference, PathLossModel};
use crate::shadowing::{BucketConfig, Domain};
use crate::sim::{CorruptionConfig, ShadowingProcess, TrajectorySpec};

/// Campaign-wide settings, read from a single JSON file. Every key is
/// optional; command-line flags override the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// dB.
    pub censor_level: f64,
    pub carrier_hz: f64,
    pub h_tx: f64,
    pub h_rx: f64,
    /// Power samples per pre-averaging window.
    pub averaging_window: usize,
    /// Breakpoint candidates for sweeps, meters.
    pub breakpoint_candidates: Vec<f64>,
    /// Longest autocorrelation lag, meters or seconds; the domain default
    /// applies when absent.
    pub lag_max: Option<f64>,
    pub speed_bins: BucketConfig,
    /// Half-width of the UWB influence window, seconds.
    pub fusion_window: f64,
    pub seed: u64,
    pub synth: Option<SynthConfig>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            censor_level: reference::CENSOR_LEVEL_DAY,
            carrier_hz: 725e6,
            h_tx: 1.75,
            h_rx: 1.75,
            averaging_window: 10,
            breakpoint_candidates: (3..=20).map(|k| 5.0 * k as f64).collect(),
            lag_max: None,
            speed_bins: BucketConfig::default(),
            fusion_window: crate::fusion::DEFAULT_FUSION_WINDOW,
            seed: 20,
            synth: None,
        }
    }
}

/// Simulation recipe for `synth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub model: PathLossModel,
    /// One simulated run per trajectory.
    pub trajectories: Vec<TrajectorySpec>,
    pub shadowing: ShadowingConfig,
    /// When present, raw GPS/UWB/RF streams are regenerated as well.
    #[serde(default)]
    pub corruption: Option<CorruptionConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowingConfig {
    pub domain: Domain,
    /// Decorrelation distance (m) or time (s).
    pub scale: f64,
    /// Fixed standard deviation, dB; when absent the model's sigma is used.
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl ShadowingConfig {
    pub fn process(&self, seed: u64) -> Result<ShadowingProcess> {
        match self.sigma {
            Some(s) => ShadowingProcess::new(s, self.scale, self.domain, seed),
            None => ShadowingProcess::model_driven(self.scale, self.domain, seed),
        }
    }
}

impl CampaignConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.censor_level.is_finite() {
            return Err(Error::domain("censor_level must be finite"));
        }
        if self.averaging_window < 1 {
            return Err(Error::domain("averaging_window must be >= 1"));
        }
        if self.breakpoint_candidates.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::domain("breakpoint candidates must be > 0"));
        }
        if let Some(l) = self.lag_max {
            if !(l > 0.0) {
                return Err(Error::domain("lag_max must be > 0"));
            }
        }
        if !(self.fusion_window > 0.0) {
            return Err(Error::domain("fusion_window must be > 0"));
        }
        if let Some(s) = &self.synth {
            s.model.validate()?;
            if s.trajectories.is_empty() {
                return Err(Error::domain("synth needs at least one trajectory"));
            }
            for t in &s.trajectories {
                t.validate()?;
            }
            s.shadowing.process(0)?;
            if let Some(c) = &s.corruption {
                c.validate()?;
            }
        }
        Ok(())
    }
}

/// Parses `start:step:stop` into the inclusive grid it describes.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad sweep {spec:?}"))))
        .collect::<Result<_>>()?;
    let [start, step, stop] = parts[..] else {
        return Err(Error::domain(format!("sweep must be start:step:stop, got {spec:?}")));
    };
    if !(start > 0.0 && step > 0.0 && stop >= start) {
        return Err(Error::domain(format!("sweep {spec:?} must have 0 < start <= stop and step > 0")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Parses `lo:hi,lo:hi,...` distance bins.
pub fn parse_bins(spec: &str) -> Result<Vec<(f64, f64)>> {
    spec.split(',')
        .map(|b| {
            let (lo, hi) = b.split_once(':').ok_or_else(|| Error::domain(format!("bin {b:?} must be lo:hi")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad bin edge {s:?}")));
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}
