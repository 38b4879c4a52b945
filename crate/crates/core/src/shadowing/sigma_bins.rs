use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::censored::Dataset;
use crate::error::{Error, Result};
use crate::pathloss::PathLossModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaBin {
    /// Inclusive lower edge, meters.
    pub lo: f64,
    /// Exclusive upper edge, meters.
    pub hi: f64,
    pub n: usize,
    /// Sample standard deviation of the residuals; `None` when fewer than
    /// two uncensored samples fall in the bin.
    pub sigma: Option<f64>,
}

/// Shadowing standard deviation per distance bin, uncensored samples only.
pub fn sigma_vs_distance(model: &PathLossModel, data: &Dataset, bins: &[(f64, f64)]) -> Result<Vec<SigmaBin>> {
    if bins.is_empty() {
        return Err(Error::domain("no distance bins given"));
    }
    let mut sorted = bins.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::domain(format!("distance bins {:?} and {:?} overlap", w[0], w[1])));
        }
    }
    if let Some(b) = bins.iter().find(|(lo, hi)| !(lo < hi)) {
        return Err(Error::domain(format!("empty distance bin {b:?}")));
    }

    let mut residuals: Vec<Vec<f64>> = vec![Vec::new(); bins.len()];
    for r in data.records().iter().filter(|r| !r.censored) {
        if let Some(i) = bins.iter().position(|&(lo, hi)| r.d >= lo && r.d < hi) {
            residuals[i].push(r.path_loss - model.mean_path_loss(r.d, r.link)?);
        }
    }
    Ok(bins
        .iter()
        .zip(residuals)
        .map(|(&(lo, hi), xs)| {
            let n = xs.len();
            let sigma = (n >= 2).then(|| {
                let mean = xs.iter().sum::<f64>() / n as f64;
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            });
            SigmaBin { lo, hi, n, sigma }
        })
        .collect())
}

/// Writes `lo_m,hi_m,n,sigma_db` rows with `-` for degenerate bins.
pub fn write_sigma_bins_csv<W: Write>(bins: &[SigmaBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lo_m", "hi_m", "n", "sigma_db"])?;
    for b in bins {
        let sigma = b.sigma.map_or_else(|| "-".to_string(), |s| s.to_string());
        w.write_record([b.lo.to_string(), b.hi.to_string(), b.n.to_string(), sigma])?;
    }
    w.flush()?;
    Ok(())
}
