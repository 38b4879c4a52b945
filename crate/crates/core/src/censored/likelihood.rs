use crate::censored::dataset::Dataset;
use crate::censored::normal::{ln_pdf, ln_sf};
use crate::error::{Error, Result};
use crate::pathloss::PathLossModel;

/// Right-censored Gaussian log-likelihood of `data` under `model`, in nats.
///
/// Uncensored samples contribute `ln φ(z) − ln σ` with `z = (PL − μ(d)) / σ(d)`;
/// censored samples contribute `ln Q((c − μ(d)) / σ(d))` where `c` is the
/// dataset's censoring level.
pub fn censored_log_likelihood(model: &PathLossModel, data: &Dataset) -> Result<f64> {
    model.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let c = data.censor_level();
    let mut total = 0.0;
    for r in data.records() {
        let mu = model.mean_path_loss(r.d, r.link)?;
        let sigma = model.shadowing_sigma(r.d, r.link)?;
        // Per-sample weights would multiply each contribution here.
        total += if r.censored {
            ln_sf((c - mu) / sigma)
        } else {
            ln_pdf((r.path_loss - mu) / sigma) - sigma.ln()
        };
    }
    Ok(total)
}

/// Bayesian information criterion `k ln(n) − 2 ln L`.
pub fn bic(log_likelihood: f64, n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("BIC needs at least one sample"));
    }
    if k == 0 {
        return Err(Error::domain("BIC needs at least one parameter"));
    }
    Ok(k as f64 * (n as f64).ln() - 2.0 * log_likelihood)
}

/// Root-mean-square residual over uncensored samples, dB.
pub fn rmse(model: &PathLossModel, data: &Dataset) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in data.records().iter().filter(|r| !r.censored) {
        let e = r.path_loss - model.mean_path_loss(r.d, r.link)?;
        sum += e * e;
        n += 1;
    }
    if n == 0 {
        return Err(Error::InsufficientData("no uncensored samples for RMSE".into()));
    }
    Ok((sum / n as f64).sqrt())
}
