use crate::error::{Error, Result};
use crate::fusion::RfSample;

/// Averages powers (dB) in linear scale over non-overlapping windows of
/// `window` samples. A trailing partial window is dropped.
pub fn preaverage_power(powers: &[f64], window: usize) -> Result<Vec<f64>> {
    check(powers.len(), window)?;
    Ok(powers
        .chunks_exact(window)
        .map(|w| 10.0 * (w.iter().map(|p| 10f64.powf(p / 10.0)).sum::<f64>() / window as f64).log10())
        .collect())
}

/// Pre-averages path-loss samples by averaging the received power, i.e.
/// `−10 lg mean(10^(−PL/10))`, stamped at each window's midpoint.
pub fn preaverage_path_loss(samples: &[RfSample], window: usize) -> Result<Vec<RfSample>> {
    check(samples.len(), window)?;
    let received: Vec<f64> = samples.iter().map(|s| -s.path_loss).collect();
    let averaged = preaverage_power(&received, window)?;
    Ok(samples
        .chunks_exact(window)
        .zip(averaged)
        .map(|(w, p)| RfSample { t: 0.5 * (w[0].t + w[window - 1].t), path_loss: -p })
        .collect())
}

fn check(n: usize, window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::domain("averaging window must be >= 1"));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}
