use serde::{Deserialize, Serialize};

use crate::censored::Dataset;
use crate::error::{Error, Result};
use crate::pathloss::PathLossModel;

/// Axis along which shadowing samples are correlated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Cumulative distance travelled by the receiver, meters.
    Distance,
    /// Time, seconds.
    Time,
}

impl Domain {
    pub fn coordinate(self, s: &ResidualSample) -> f64 {
        match self {
            Domain::Distance => s.d_cum,
            Domain::Time => s.t,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Domain::Distance => "m",
            Domain::Time => "s",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(Domain::Distance),
            "time" => Ok(Domain::Time),
            other => Err(Error::domain(format!("unknown correlation domain {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    /// Cumulative receiver travel distance since the start of the run.
    pub d_cum: f64,
    /// Shadowing residual, dB.
    pub x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Domain,
    pub spacing: f64,
}

/// One uninterrupted block of shadowing residuals from a single run.
///
/// Blocks end wherever censored samples were removed; correlation sums never
/// pair samples of different blocks. `grid` is set once the block has been
/// resampled onto a uniform axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub run_id: String,
    pub block: usize,
    pub samples: Vec<ResidualSample>,
    pub grid: Option<Grid>,
}

/// Shadowing residuals `PL − μ(d)` of the uncensored samples, split into
/// blocks at censored samples. The receiver's cumulative travel distance
/// integrates `|v_rx| Δt` over every record, censored or not.
pub fn extract_residuals(model: &PathLossModel, data: &Dataset) -> Result<Vec<ResidualSeries>> {
    let mut out = Vec::new();
    for run in data.runs() {
        let run_id = &run[0].run_id;
        let mut block = 0;
        let mut current: Vec<ResidualSample> = Vec::new();
        let mut d_cum = 0.0;
        let mut prev_t = run[0].t;
        for r in run {
            d_cum += r.v_rx.abs() * (r.t - prev_t);
            prev_t = r.t;
            if r.censored {
                if !current.is_empty() {
                    out.push(ResidualSeries {
                        run_id: run_id.clone(),
                        block,
                        samples: std::mem::take(&mut current),
                        grid: None,
                    });
                    block += 1;
                }
                continue;
            }
            let x = r.path_loss - model.mean_path_loss(r.d, r.link)?;
            current.push(ResidualSample { t: r.t, d_cum, x });
        }
        if !current.is_empty() {
            out.push(ResidualSeries { run_id: run_id.clone(), block, samples: current, grid: None });
        }
    }
    Ok(out)
}

impl ResidualSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Linearly interpolates the block onto a uniform grid along `domain`
    /// starting at its first sample. Returns `None` when the block spans
    /// less than one grid step.
    pub fn resample_uniform(&self, domain: Domain, spacing: f64) -> Result<Option<ResidualSeries>> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::domain(format!("grid spacing must be > 0, got {spacing}")));
        }
        let n = self.samples.len();
        if n < 2 {
            return Ok(None);
        }
        let coords: Vec<f64> = self.samples.iter().map(|s| domain.coordinate(s)).collect();
        if coords.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain(format!("{domain:?} coordinate decreases within run {} block {}", self.run_id, self.block)));
        }
        let start = coords[0];
        let span = coords[n - 1] - start;
        if span < spacing {
            return Ok(None);
        }
        let steps = (span / spacing + 1e-9).floor() as usize;
        let mut out = Vec::with_capacity(steps + 1);
        let mut j = 0;
        for k in 0..=steps {
            let g = (start + k as f64 * spacing).min(coords[n - 1]);
            while j + 2 < n && coords[j + 1] <= g {
                j += 1;
            }
            let (a, b) = (&self.samples[j], &self.samples[j + 1]);
            let width = coords[j + 1] - coords[j];
            let f = if width > 0.0 { ((g - coords[j]) / width).clamp(0.0, 1.0) } else { 1.0 };
            out.push(ResidualSample { t: lerp(a.t, b.t, f), d_cum: lerp(a.d_cum, b.d_cum, f), x: lerp(a.x, b.x, f) });
        }
        Ok(Some(ResidualSeries {
            run_id: self.run_id.clone(),
            block: self.block,
            samples: out,
            grid: Some(Grid { domain, spacing }),
        }))
    }
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    if f == 0.0 {
        a
    } else if f == 1.0 {
        b
    } else {
        a + f * (b - a)
    }
}

/// Resamples every block, dropping those shorter than one grid step.
pub fn resample_all(series: &[ResidualSeries], domain: Domain, spacing: f64) -> Result<Vec<ResidualSeries>> {
    let mut out = Vec::with_capacity(series.len());
    for s in series {
        if let Some(r) = s.resample_uniform(domain, spacing)? {
            out.push(r);
        }
    }
    Ok(out)
}
