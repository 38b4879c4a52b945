use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shadowing::residuals::{Domain, ResidualSeries};

/// Scan density of the decorrelation-scale search, points per decade.
const SCAN_POINTS_PER_DECADE: f64 = 64.0;

/// Empirical shadowing autocorrelation on a uniform lag grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrEstimate {
    pub domain: Domain,
    pub spacing: f64,
    pub lags: Vec<f64>,
    /// `R(Δ)`, dB².
    pub r: Vec<f64>,
    /// Number of products averaged into each `R(Δ)`.
    pub n_per_lag: Vec<u64>,
    /// `R(0)`, dB².
    pub sigma2: f64,
    /// Fitted decorrelation distance (m) or time (s).
    pub fitted_scale: Option<f64>,
    pub fit_weighted_sse: Option<f64>,
}

/// `R(k·h) = Σ x_i x_{i+k} / N(k)` over all same-block pairs, pooled across
/// series. Lags run from 0 to `max_lag`, truncated where no pairs remain.
pub fn autocorrelation(series: &[ResidualSeries], max_lag: f64) -> Result<AutocorrEstimate> {
    let grid = series
        .first()
        .and_then(|s| s.grid)
        .ok_or_else(|| Error::DomainMismatch("autocorrelation needs resampled series".into()))?;
    if series.iter().any(|s| s.grid != Some(grid)) {
        return Err(Error::DomainMismatch("series differ in domain or grid spacing".into()));
    }
    if !(max_lag >= 0.0) {
        return Err(Error::domain(format!("max lag must be >= 0, got {max_lag}")));
    }
    let max_k = (max_lag / grid.spacing + 1e-9).floor() as usize;
    let xs: Vec<Vec<f64>> = series.iter().map(|s| s.samples.iter().map(|p| p.x).collect()).collect();

    let mut lags = Vec::new();
    let mut r = Vec::new();
    let mut n_per_lag = Vec::new();
    for k in 0..=max_k {
        let mut sum = 0.0;
        let mut n = 0u64;
        for x in &xs {
            if x.len() > k {
                sum += x[..x.len() - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>();
                n += (x.len() - k) as u64;
            }
        }
        if n == 0 {
            break;
        }
        lags.push(k as f64 * grid.spacing);
        r.push(sum / n as f64);
        n_per_lag.push(n);
    }
    if lags.is_empty() {
        return Err(Error::InsufficientData("no samples at lag 0".into()));
    }
    Ok(AutocorrEstimate {
        domain: grid.domain,
        spacing: grid.spacing,
        sigma2: r[0],
        lags,
        r,
        n_per_lag,
        fitted_scale: None,
        fit_weighted_sse: None,
    })
}

impl AutocorrEstimate {
    pub fn normalized(&self) -> Vec<f64> {
        self.r.iter().map(|r| r / self.sigma2).collect()
    }

    /// `Σ N(Δ) (R(Δ)/σ² − exp(−Δ/scale))²`
    pub fn weighted_sse(&self, scale: f64) -> f64 {
        self.lags
            .iter()
            .zip(&self.r)
            .zip(&self.n_per_lag)
            .map(|((&lag, &r), &n)| {
                let e = r / self.sigma2 - (-lag / scale).exp();
                n as f64 * e * e
            })
            .sum()
    }

    pub fn max_lag(&self) -> f64 {
        *self.lags.last().unwrap_or(&0.0)
    }

    /// Pair count at the lag closest to `lag`; zero beyond the last lag.
    pub fn pairs_at(&self, lag: f64) -> u64 {
        let k = (lag / self.spacing).round();
        if k < 0.0 {
            return 0;
        }
        self.n_per_lag.get(k as usize).copied().unwrap_or(0)
    }

    /// Writes `lag,normalized_r,n` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lag", "normalized_r", "n"])?;
        for ((lag, r), n) in self.lags.iter().zip(self.normalized()).zip(&self.n_per_lag) {
            w.write_record([lag.to_string(), r.to_string(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weighted least-squares fit of `exp(−Δ/scale)` to the normalised
/// autocorrelation, weights `N(Δ)`. The scale is located on a logarithmic
/// grid and refined by golden-section search in log-scale.
pub fn fit_gudmundson(est: &AutocorrEstimate) -> Result<AutocorrEstimate> {
    if est.lags.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 lags, have {}", est.lags.len())));
    }
    if !(est.sigma2 > 0.0) {
        return Err(Error::DegenerateFit("zero shadowing variance".into()));
    }
    let rho = est.normalized();
    if rho[1..].iter().all(|&v| v >= 1.0) || rho[1..].iter().all(|&v| v <= 0.0) {
        return Err(Error::DegenerateFit("normalised autocorrelation is not in (0, 1)".into()));
    }

    let lo = (est.spacing * 1e-2).ln();
    let hi = (100.0 * est.max_lag()).ln();
    let step = std::f64::consts::LN_10 / SCAN_POINTS_PER_DECADE;
    let count = ((hi - lo) / step).ceil() as usize + 1;
    let sse = |ln_scale: f64| est.weighted_sse(ln_scale.exp());

    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..count {
        let v = sse(lo + i as f64 * step);
        if v < best_v {
            best_i = i;
            best_v = v;
        }
    }
    let a = lo + best_i.saturating_sub(1) as f64 * step;
    let b = lo + (best_i + 1).min(count - 1) as f64 * step;
    let (ln_refined, v_refined) = golden_section(sse, a, b);
    let (ln_scale, v) = if v_refined <= best_v { (ln_refined, v_refined) } else { (lo + best_i as f64 * step, best_v) };

    Ok(AutocorrEstimate { fitted_scale: Some(ln_scale.exp()), fit_weighted_sse: Some(v), ..est.clone() })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadowing::residuals::{Grid, ResidualSample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gridded(xs: &[f64], spacing: f64, block: usize) -> ResidualSeries {
        ResidualSeries {
            run_id: "r".into(),
            block,
            samples: xs
                .iter()
                .enumerate()
                .map(|(i, &x)| ResidualSample { t: i as f64 * spacing, d_cum: i as f64 * spacing, x })
                .collect(),
            grid: Some(Grid { domain: Domain::Distance, spacing }),
        }
    }

    fn exact_curve(scale: f64, sigma2: f64, spacing: f64, lags: usize) -> AutocorrEstimate {
        let l: Vec<f64> = (0..lags).map(|k| k as f64 * spacing).collect();
        AutocorrEstimate {
            domain: Domain::Distance,
            spacing,
            r: l.iter().map(|d| sigma2 * (-d / scale).exp()).collect(),
            n_per_lag: (0..lags).map(|k| (10_000 - k) as u64).collect(),
            lags: l,
            sigma2,
            fitted_scale: None,
            fit_weighted_sse: None,
        }
    }

    #[test]
    fn constant_series() {
        let s = gridded(&[1.5; 20], 0.5, 0);
        let est = autocorrelation(&[s], 3.0).unwrap();
        assert_eq!(est.lags.len(), 7);
        assert!(est.r.iter().all(|&r| (r - 2.25).abs() < 1e-12));
        assert_eq!(est.n_per_lag, [20, 19, 18, 17, 16, 15, 14]);
        assert_eq!(est.sigma2, est.r[0]);
    }

    #[test]
    fn pairs_never_cross_blocks() {
        // +1 block and -1 block: any cross product would be negative
        let a = gridded(&[1.0; 10], 1.0, 0);
        let b = gridded(&[-1.0; 10], 1.0, 1);
        let est = autocorrelation(&[a, b], 15.0).unwrap();
        assert!(est.r.iter().all(|&r| r == 1.0));
        assert_eq!(est.lags.len(), 10);
        assert_eq!(est.n_per_lag[9], 2);
    }

    #[test]
    fn lag_zero_is_mean_square() {
        let a = gridded(&[1.0, -2.0, 0.5], 1.0, 0);
        let b = gridded(&[3.0, 0.25], 1.0, 1);
        let est = autocorrelation(&[a, b], 1.0).unwrap();
        let expected = (1.0 + 4.0 + 0.25 + 9.0 + 0.0625) / 5.0;
        assert_eq!(est.r[0], expected);
        assert_eq!(est.n_per_lag[0], 5);
    }

    #[test]
    fn white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let est = autocorrelation(&[gridded(&xs, 1.0, 0)], 50.0).unwrap();
        assert!((est.r[0] - 1.0).abs() < 0.02);
        let bound = 5.0 / (1e5f64).sqrt();
        for r in &est.r[1..] {
            assert!(r.abs() < bound, "{r}");
        }
    }

    #[test]
    fn mixed_grids_rejected() {
        let a = gridded(&[1.0; 5], 1.0, 0);
        let b = gridded(&[1.0; 5], 0.5, 1);
        assert!(matches!(autocorrelation(&[a, b], 2.0), Err(Error::DomainMismatch(_))));
        let mut raw = gridded(&[1.0; 5], 1.0, 0);
        raw.grid = None;
        assert!(autocorrelation(&[raw], 2.0).is_err());
        assert!(autocorrelation(&[], 2.0).is_err());
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let est = exact_curve(159.0, 20.0, 0.5, 1201);
        let fit = fit_gudmundson(&est).unwrap();
        let s = fit.fitted_scale.unwrap();
        assert!((s - 159.0).abs() < 1.0, "{s}");
        assert!(fit.fit_weighted_sse.unwrap() < 1e-12);
    }

    #[test]
    fn weight_scaling_does_not_move_fit() {
        let mut est = exact_curve(40.0, 9.0, 1.0, 200);
        // perturb so the optimum is not exactly at zero error
        for (i, r) in est.r.iter_mut().enumerate().skip(1) {
            *r *= 1.0 + 0.05 * ((i * 37 % 11) as f64 - 5.0) / 5.0;
        }
        let a = fit_gudmundson(&est).unwrap().fitted_scale.unwrap();
        est.n_per_lag.iter_mut().for_each(|n| *n *= 2);
        let b = fit_gudmundson(&est).unwrap().fitted_scale.unwrap();
        assert!((a - b).abs() < 1e-9 * a, "{a} {b}");
    }

    #[test]
    fn fitted_scale_beats_audit_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut est = exact_curve(7.6, 20.0, 0.0165, 1800);
        for r in est.r.iter_mut().skip(1) {
            let e: f64 = StandardNormal.sample(&mut rng);
            *r += 0.3 * e;
        }
        let fit = fit_gudmundson(&est).unwrap();
        let best = fit.fit_weighted_sse.unwrap();
        assert_eq!(best, est.weighted_sse(fit.fitted_scale.unwrap()));
        let (lo, hi) = (est.spacing.ln(), (100.0 * est.max_lag()).ln());
        for i in 0..1000 {
            let s = (lo + (hi - lo) * i as f64 / 999.0).exp();
            assert!(best <= est.weighted_sse(s) * (1.0 + 1e-12), "audit scale {s}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let est = exact_curve(10.0, 1.0, 1.0, 2);
        assert!(matches!(fit_gudmundson(&est), Err(Error::DegenerateFit(_))));
        let mut flat = exact_curve(10.0, 1.0, 1.0, 10);
        flat.r.iter_mut().for_each(|r| *r = 1.0);
        assert!(matches!(fit_gudmundson(&flat), Err(Error::DegenerateFit(_))));
        let mut neg = exact_curve(10.0, 1.0, 1.0, 10);
        neg.r.iter_mut().skip(1).for_each(|r| *r = -0.2);
        assert!(matches!(fit_gudmundson(&neg), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn csv_export() {
        let est = exact_curve(10.0, 4.0, 1.0, 3);
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lag,normalized_r,n"));
        assert_eq!(lines.next(), Some("0,1,10000"));
    }
}
