use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::censored::{Dataset, MeasurementRecord};
use crate::error::{Error, Result};
use crate::shadowing::acf::{autocorrelation, fit_gudmundson};
use crate::shadowing::residuals::{Domain, ResidualSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketConfig {
    /// Half-open `|v_rx|` ranges, m/s.
    pub rx_speed_bins: Vec<(f64, f64)>,
    /// Half-open `|v_tx − v_rx|` ranges, m/s.
    pub rel_speed_bins: Vec<(f64, f64)>,
    /// Longest lag used in each cell's fit, seconds.
    pub max_lag: f64,
    /// Minimum pair count at the fitted decorrelation lag.
    pub min_samples: u64,
}

impl Default for BucketConfig {
    fn default() -> Self {
        Self {
            rx_speed_bins: vec![(0.0, 10.0), (10.0, 20.0), (20.0, 30.0), (30.0, 40.0)],
            rel_speed_bins: vec![(0.0, 5.0), (5.0, 15.0)],
            max_lag: 30.0,
            min_samples: 100,
        }
    }
}

/// Decorrelation time per (receiver speed, relative speed) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedBucketTable {
    pub rx_speed_bins: Vec<(f64, f64)>,
    pub rel_speed_bins: Vec<(f64, f64)>,
    /// `t_c[rx][rel]`, seconds; `None` when the cell was suppressed.
    pub t_c: Vec<Vec<Option<f64>>>,
    /// Pair count at the fitted decorrelation lag, zero for empty cells.
    pub pairs_at_scale: Vec<Vec<u64>>,
    pub min_samples_rule: u64,
}

fn bin_of(bins: &[(f64, f64)], v: f64) -> Option<usize> {
    bins.iter().position(|&(lo, hi)| v >= lo && v < hi)
}

/// Speeds in force at `t`: those of the last record at or before `t`.
fn speeds_at(run: &[MeasurementRecord], t: f64) -> (f64, f64) {
    let i = run.partition_point(|r| r.t <= t).saturating_sub(1);
    (run[i].v_rx, run[i].v_tx)
}

/// Splits time-gridded residual blocks by the speed cell of each sample and
/// fits the time-domain exponential model per cell. Cells whose pair count
/// at the fitted decorrelation lag falls below `cfg.min_samples`, or whose
/// fit fails, are left empty.
pub fn bucketed_decorrelation(
    series: &[ResidualSeries],
    data: &Dataset,
    cfg: &BucketConfig,
) -> Result<SpeedBucketTable> {
    if series.iter().any(|s| s.grid.map(|g| g.domain) != Some(Domain::Time)) {
        return Err(Error::DomainMismatch("speed buckets need time-domain resampled series".into()));
    }
    let runs: HashMap<&str, &[MeasurementRecord]> = data.runs().map(|r| (r[0].run_id.as_str(), r)).collect();

    let (n_rx, n_rel) = (cfg.rx_speed_bins.len(), cfg.rel_speed_bins.len());
    let mut cells: Vec<Vec<Vec<ResidualSeries>>> = vec![vec![Vec::new(); n_rel]; n_rx];
    for s in series {
        let run = runs
            .get(s.run_id.as_str())
            .ok_or_else(|| Error::domain(format!("run {} not present in dataset", s.run_id)))?;
        let mut piece: Option<((usize, usize), ResidualSeries)> = None;
        for sample in &s.samples {
            let (v_rx, v_tx) = speeds_at(run, sample.t);
            let cell = bin_of(&cfg.rx_speed_bins, v_rx.abs()).zip(bin_of(&cfg.rel_speed_bins, (v_tx - v_rx).abs()));
            match (&mut piece, cell) {
                (Some((current, p)), Some(c)) if *current == c => p.samples.push(*sample),
                _ => {
                    if let Some(((i, j), p)) = piece.take() {
                        cells[i][j].push(p);
                    }
                    piece = cell.map(|c| {
                        let p = ResidualSeries {
                            run_id: s.run_id.clone(),
                            block: s.block,
                            samples: vec![*sample],
                            grid: s.grid,
                        };
                        (c, p)
                    });
                }
            }
        }
        if let Some(((i, j), p)) = piece {
            cells[i][j].push(p);
        }
    }

    let mut t_c = vec![vec![None; n_rel]; n_rx];
    let mut pairs_at_scale = vec![vec![0; n_rel]; n_rx];
    for i in 0..n_rx {
        for j in 0..n_rel {
            if cells[i][j].is_empty() {
                continue;
            }
            let Ok(est) = autocorrelation(&cells[i][j], cfg.max_lag) else { continue };
            let Ok(fit) = fit_gudmundson(&est) else { continue };
            let scale = fit.fitted_scale.expect("fitted");
            let pairs = fit.pairs_at(scale);
            pairs_at_scale[i][j] = pairs;
            if pairs >= cfg.min_samples {
                t_c[i][j] = Some(scale);
            }
        }
    }
    Ok(SpeedBucketTable {
        rx_speed_bins: cfg.rx_speed_bins.clone(),
        rel_speed_bins: cfg.rel_speed_bins.clone(),
        t_c,
        pairs_at_scale,
        min_samples_rule: cfg.min_samples,
    })
}

fn range_label(&(lo, hi): &(f64, f64)) -> String {
    format!("{lo}-{hi}")
}

impl SpeedBucketTable {
    /// Writes the table with receiver-speed rows and relative-speed columns;
    /// suppressed cells are written as `-`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["v_rx_mps".to_string()];
        header.extend(self.rel_speed_bins.iter().map(range_label));
        w.write_record(&header)?;
        for (bin, row) in self.rx_speed_bins.iter().zip(&self.t_c) {
            let mut rec = vec![range_label(bin)];
            rec.extend(row.iter().map(|c| c.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
