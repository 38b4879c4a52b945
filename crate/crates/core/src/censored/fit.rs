//! Censored maximum-likelihood fitting of the model families.
//!
//! With the breakpoint fixed every family is linear in its path-loss
//! coefficients: `μ(d) = β · x(d)` with regressors
//!
//! * single slope: `x = [1, 10 lg(d/10)]`
//! * double slope: `x = [1, 10 lg(min(d, b)/10), 10 lg(max(d, b)/b)]`
//!
//! so the uncensored part of the log-likelihood reduces to per-regime
//! second-moment sums and only censored samples are visited per objective
//! evaluation. The search runs over `(β, ln σ)` with a multi-start simplex:
//! every start is screened at a coarse tolerance, the best one is polished
//! to the full tolerance and then restarted once to confirm convergence.

use log::debug;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::censored::dataset::Dataset;
use crate::censored::likelihood::{bic, censored_log_likelihood, rmse};
use crate::censored::normal::ln_sf;
use crate::censored::simplex::{NelderMead, SimplexResult};
use crate::error::{Error, Result};
use crate::pathloss::{
    DoubleSlopeParams, Family, LinkClass, PathLossModel, PerLinkClassParams, SingleSlopeParams,
    REFERENCE_DISTANCE_M,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: PathLossModel,
    /// Maximised censored log-likelihood, nats.
    pub log_likelihood: f64,
    pub bic: f64,
    /// RMS residual over uncensored samples, dB.
    pub rmse: f64,
    pub n_total: usize,
    pub n_censored: usize,
    pub converged: bool,
    /// Objective evaluations spent across all starts.
    pub evaluations: usize,
}

impl FitResult {
    pub fn family(&self) -> Family {
        self.model.family()
    }
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Number of simplex starts; the first is the least-squares fit of the
    /// uncensored samples, the rest are perturbed copies of it.
    pub starts: usize,
    /// Relative perturbation of the extra starts.
    pub perturbation: f64,
    pub seed: u64,
    pub screen: NelderMead,
    pub polish: NelderMead,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            perturbation: 0.2,
            seed: 0x7657_5f66_6974,
            screen: NelderMead { x_tol: 1e-3, f_tol: 1e-3, max_evals: 4_000 },
            polish: NelderMead::default(),
        }
    }
}

/// Fits `family` to `data` with default options. `d_break` is required for
/// the double-slope families and ignored otherwise.
pub fn fit(family: Family, data: &Dataset, d_break: Option<f64>) -> Result<FitResult> {
    fit_with(family, data, d_break, &FitOptions::default())
}

pub fn fit_with(family: Family, data: &Dataset, d_break: Option<f64>, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (model, converged, evaluations) = match family {
        Family::Ss => {
            let sol = fit_linear(Design::Single, data, opts)?;
            (single_params(&sol), sol.converged, sol.evals)
        }
        Family::PerClass => {
            if data.records().iter().any(|r| r.link == LinkClass::Unknown) {
                return Err(Error::LinkClassRequired);
            }
            let mut classes = Vec::with_capacity(3);
            for class in LinkClass::LABELLED {
                let subset = data.filter_link(class);
                let uncensored = subset.len() - subset.n_censored();
                if uncensored < 3 {
                    return Err(Error::InsufficientClassData(class));
                }
                let sol = fit_linear(Design::Single, &subset, opts).map_err(|e| match e {
                    Error::InsufficientData(_) => Error::InsufficientClassData(class),
                    other => other,
                })?;
                classes.push(sol);
            }
            let params = |i: usize| match single_params(&classes[i]) {
                PathLossModel::SingleSlope(p) => p,
                _ => unreachable!(),
            };
            let model = PathLossModel::PerClass(PerLinkClassParams { los: params(0), olos: params(1), nlos: params(2) });
            let converged = classes.iter().all(|s| s.converged);
            let evals = classes.iter().map(|s| s.evals).sum();
            (model, converged, evals)
        }
        Family::Dsss | Family::Dsds => {
            let d_break = d_break.ok_or_else(|| Error::domain(format!("{family} needs a breakpoint distance")))?;
            if !(d_break > 0.0 && d_break.is_finite()) {
                return Err(Error::domain(format!("breakpoint must be > 0 m, got {d_break}")));
            }
            let split_sigma = family == Family::Dsds;
            let sol = fit_linear(Design::Double { d_break, split_sigma }, data, opts)?;
            let sigma1 = sol.theta[3].exp();
            let sigma2 = if split_sigma { sol.theta[4].exp() } else { sigma1 };
            let model = PathLossModel::DoubleSlope(DoubleSlopeParams {
                l_ref: sol.theta[0],
                gamma1: sol.theta[1],
                gamma2: sol.theta[2],
                d_break,
                sigma1,
                sigma2,
                shared_sigma: !split_sigma,
            });
            (model, sol.converged, sol.evals)
        }
    };
    finish(model, data, converged, evaluations)
}

fn finish(model: PathLossModel, data: &Dataset, converged: bool, evaluations: usize) -> Result<FitResult> {
    let log_likelihood = censored_log_likelihood(&model, data)?;
    let n_total = data.len();
    Ok(FitResult {
        bic: bic(log_likelihood, n_total, model.parameter_count())?,
        rmse: rmse(&model, data)?,
        model,
        log_likelihood,
        n_total,
        n_censored: data.n_censored(),
        converged,
        evaluations,
    })
}

fn single_params(sol: &Solution) -> PathLossModel {
    PathLossModel::SingleSlope(SingleSlopeParams { l_ref: sol.theta[0], gamma: sol.theta[1], sigma: sol.theta[2].exp() })
}

#[derive(Clone, Copy, Debug)]
enum Design {
    Single,
    Double { d_break: f64, split_sigma: bool },
}

impl Design {
    fn coefficients(self) -> usize {
        match self {
            Design::Single => 2,
            Design::Double { .. } => 3,
        }
    }

    fn regimes(self) -> usize {
        match self {
            Design::Double { split_sigma: true, .. } => 2,
            _ => 1,
        }
    }

    fn row(self, d: f64) -> ([f64; 3], usize) {
        match self {
            Design::Single => ([1.0, 10.0 * (d / REFERENCE_DISTANCE_M).log10(), 0.0], 0),
            Design::Double { d_break, split_sigma } => {
                let x = [
                    1.0,
                    10.0 * (d.min(d_break) / REFERENCE_DISTANCE_M).log10(),
                    10.0 * (d.max(d_break) / d_break).log10(),
                ];
                (x, usize::from(split_sigma && d >= d_break))
            }
        }
    }
}

/// Second moments of the uncensored residuals about the starting
/// coefficients `β0`, for one shadowing regime.
#[derive(Clone, Debug, Default)]
struct RegimeMoments {
    n: f64,
    srr: f64,
    srx: [f64; 3],
    sxx: [[f64; 3]; 3],
}

struct Problem {
    p: usize,
    beta0: [f64; 3],
    moments: Vec<RegimeMoments>,
    censored: Vec<([f64; 3], usize)>,
    censor_level: f64,
}

impl Problem {
    fn build(design: Design, data: &Dataset) -> Result<(Self, Vec<f64>)> {
        let p = design.coefficients();
        let rows: Vec<([f64; 3], usize, f64, bool)> = data
            .records()
            .iter()
            .map(|r| {
                let (x, regime) = design.row(r.d);
                (x, regime, r.path_loss, r.censored)
            })
            .collect();

        let mut xtx = Matrix3::<f64>::zeros();
        let mut xty = Vector3::<f64>::zeros();
        let mut n_unc = 0usize;
        for (x, _, y, censored) in &rows {
            if *censored {
                continue;
            }
            n_unc += 1;
            for i in 0..p {
                xty[i] += x[i] * y;
                for j in 0..p {
                    xtx[(i, j)] += x[i] * x[j];
                }
            }
        }
        if n_unc <= p {
            return Err(Error::InsufficientData(format!("{n_unc} uncensored samples for {p} coefficients")));
        }
        for i in p..3 {
            xtx[(i, i)] = 1.0;
        }
        let beta = xtx
            .cholesky()
            .map(|c| c.solve(&xty))
            .ok_or_else(|| Error::InsufficientData("uncensored distances do not span the model regressors".into()))?;
        let beta0 = [beta[0], beta[1], if p == 3 { beta[2] } else { 0.0 }];

        let mut moments = vec![RegimeMoments::default(); design.regimes()];
        let mut censored = Vec::new();
        for (x, regime, y, is_censored) in rows {
            if is_censored {
                censored.push((x, regime));
                continue;
            }
            let r = y - dot(&beta0, &x, p);
            let m = &mut moments[regime];
            m.n += 1.0;
            m.srr += r * r;
            for i in 0..p {
                m.srx[i] += r * x[i];
                for j in 0..p {
                    m.sxx[i][j] += x[i] * x[j];
                }
            }
        }

        let total_n: f64 = moments.iter().map(|m| m.n).sum();
        let pooled = (moments.iter().map(|m| m.srr).sum::<f64>() / total_n).sqrt().max(1e-3);
        let mut theta0: Vec<f64> = beta0[..p].to_vec();
        for m in &moments {
            let s = if m.n >= 2.0 { (m.srr / m.n).sqrt().max(1e-3) } else { pooled };
            theta0.push(s.ln());
        }

        Ok((Self { p, beta0, moments, censored, censor_level: data.censor_level() }, theta0))
    }

    fn neg_log_likelihood(&self, theta: &[f64]) -> f64 {
        let p = self.p;
        let mut delta = [0.0; 3];
        for i in 0..p {
            delta[i] = theta[i] - self.beta0[i];
        }
        let mut inv_sigma = [0.0; 2];
        let mut nll = 0.0;
        for (k, m) in self.moments.iter().enumerate() {
            let ln_sigma = theta[p + k];
            inv_sigma[k] = (-ln_sigma).exp();
            if m.n == 0.0 {
                continue;
            }
            let mut ss = m.srr;
            for i in 0..p {
                ss -= 2.0 * delta[i] * m.srx[i];
                for j in 0..p {
                    ss += delta[i] * m.sxx[i][j] * delta[j];
                }
            }
            nll += m.n * (ln_sigma + LN_SQRT_2PI) + 0.5 * ss * inv_sigma[k] * inv_sigma[k];
        }
        for (x, regime) in &self.censored {
            let mu = dot(theta, x, p);
            nll -= ln_sf((self.censor_level - mu) * inv_sigma[*regime]);
        }
        nll
    }
}

fn dot(beta: &[f64], x: &[f64; 3], p: usize) -> f64 {
    (0..p).map(|i| beta[i] * x[i]).sum()
}

struct Solution {
    theta: Vec<f64>,
    converged: bool,
    evals: usize,
}

fn fit_linear(design: Design, data: &Dataset, opts: &FitOptions) -> Result<Solution> {
    let (problem, theta0) = Problem::build(design, data)?;
    let p = problem.p;
    let step: Vec<f64> = (0..theta0.len())
        .map(|i| match i {
            0 => 1.0,
            i if i < p => 0.1,
            _ => 0.05,
        })
        .collect();
    let objective = |theta: &[f64]| problem.neg_log_likelihood(theta);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![theta0.clone()];
    for _ in 1..opts.starts.max(1) {
        let start = theta0
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let factor = if rng.gen::<bool>() { 1.0 + opts.perturbation } else { 1.0 - opts.perturbation };
                if i < p {
                    v * factor
                } else {
                    v + factor.ln()
                }
            })
            .collect();
        starts.push(start);
    }

    let mut evals = 0;
    let mut best: Option<SimplexResult> = None;
    for start in &starts {
        let r = opts.screen.minimize(objective, start, &step);
        evals += r.evals;
        if best.as_ref().map_or(true, |b| r.f < b.f) {
            best = Some(r);
        }
    }
    let screened = best.expect("at least one start");

    let polished = opts.polish.minimize(objective, &screened.x, &step);
    let restarted = opts.polish.minimize(objective, &polished.x, &step);
    evals += polished.evals + restarted.evals;
    debug!(
        "censored fit: screened nll {:.6}, polished {:.9}, restarted {:.9}, {} evals",
        screened.f, polished.f, restarted.f, evals
    );
    let converged = polished.converged && restarted.converged;
    let theta = if restarted.f <= polished.f { restarted.x } else { polished.x };
    Ok(Solution { theta, converged, evals })
}

/// One breakpoint candidate of a sweep and its fit outcome.
#[derive(Debug)]
pub struct SweepEntry {
    pub d_break: f64,
    pub outcome: Result<FitResult>,
}

/// Fits a double-slope family at each candidate breakpoint, in candidate
/// order. Per-candidate failures are recorded rather than aborting.
pub fn sweep_breakpoint(family: Family, data: &Dataset, candidates: &[f64]) -> Result<Vec<SweepEntry>> {
    sweep_breakpoint_with(family, data, candidates, &FitOptions::default())
}

pub fn sweep_breakpoint_with(
    family: Family,
    data: &Dataset,
    candidates: &[f64],
    opts: &FitOptions,
) -> Result<Vec<SweepEntry>> {
    if !family.is_double_slope() {
        return Err(Error::domain(format!("{family} has no breakpoint to sweep")));
    }
    if candidates.is_empty() {
        return Err(Error::domain("breakpoint sweep needs at least one candidate"));
    }
    if let Some(bad) = candidates.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::domain(format!("breakpoint candidates must be > 0, got {bad}")));
    }
    Ok(candidates
        .iter()
        .map(|&d_break| SweepEntry { d_break, outcome: fit_with(family, data, Some(d_break), opts) })
        .collect())
}

/// Lowest-BIC successful entry of a sweep.
pub fn best_of_sweep(entries: &[SweepEntry]) -> Option<&FitResult> {
    entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .min_by(|a, b| a.bic.total_cmp(&b.bic))
}

/// All four families fitted to one dataset, double-slope families swept
/// over the same breakpoint candidates.
#[derive(Debug)]
pub struct Comparison {
    pub ss: Result<FitResult>,
    pub per_class: Result<FitResult>,
    pub dsss: Vec<SweepEntry>,
    pub dsds: Vec<SweepEntry>,
}

impl Comparison {
    /// Best fit of every family that produced one, sorted by increasing BIC.
    pub fn ranked(&self) -> Vec<&FitResult> {
        let mut out: Vec<&FitResult> = [self.ss.as_ref().ok(), self.per_class.as_ref().ok()]
            .into_iter()
            .flatten()
            .chain(best_of_sweep(&self.dsss))
            .chain(best_of_sweep(&self.dsds))
            .collect();
        out.sort_by(|a, b| a.bic.total_cmp(&b.bic));
        out
    }

    pub fn best(&self) -> Option<&FitResult> {
        self.ranked().into_iter().next()
    }

    pub fn all_converged(&self) -> bool {
        self.ranked().iter().all(|f| f.converged)
    }
}

pub fn compare(data: &Dataset, candidates: &[f64], opts: &FitOptions) -> Result<Comparison> {
    Ok(Comparison {
        ss: fit_with(Family::Ss, data, None, opts),
        per_class: fit_with(Family::PerClass, data, None, opts),
        dsss: sweep_breakpoint_with(Family::Dsss, data, candidates, opts)?,
        dsds: sweep_breakpoint_with(Family::Dsds, data, candidates, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censored::dataset::MeasurementRecord;
    use crate::pathloss::reference;
    use rand_distr::{Distribution, Normal, Uniform};

    fn synth(model: &PathLossModel, n: usize, d_range: (f64, f64), censor: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(d_range.0, d_range.1);
        let links = LinkClass::LABELLED;
        let recs = (0..n)
            .map(|i| {
                let d = dist.sample(&mut rng);
                let link = links[i % 3];
                let mu = model.mean_path_loss(d, link).unwrap();
                let s = model.shadowing_sigma(d, link).unwrap();
                MeasurementRecord {
                    run_id: "u".into(),
                    t: i as f64,
                    d,
                    path_loss: mu + Normal::new(0.0, s).unwrap().sample(&mut rng),
                    censored: false,
                    link,
                    v_tx: 0.0,
                    v_rx: 0.0,
                }
            })
            .collect();
        Dataset::new(recs, censor).unwrap()
    }

    #[test]
    fn fast_objective_matches_reference_likelihood() {
        let data = synth(&reference::dsds(), 3000, (5.0, 1500.0), 105.0, 3);
        assert!(data.n_censored() > 100);
        let design = Design::Double { d_break: 35.0, split_sigma: true };
        let (problem, _) = Problem::build(design, &data).unwrap();
        for theta in [[59.0, 1.7, 3.0, 0.8f64.ln(), 1.5f64.ln()], [61.0, 1.4, 3.3, 2.0f64.ln(), 4.0f64.ln()]] {
            let model = PathLossModel::DoubleSlope(DoubleSlopeParams {
                l_ref: theta[0],
                gamma1: theta[1],
                gamma2: theta[2],
                d_break: 35.0,
                sigma1: theta[3].exp(),
                sigma2: theta[4].exp(),
                shared_sigma: false,
            });
            let slow = censored_log_likelihood(&model, &data).unwrap();
            let fast = -problem.neg_log_likelihood(&theta);
            assert!((slow - fast).abs() < 1e-7 * slow.abs(), "{slow} vs {fast}");
        }
    }

    #[test]
    fn recovers_single_slope_with_censoring() {
        let truth = reference::single_slope();
        let data = synth(&truth, 6000, (5.0, 800.0), 115.0, 9);
        let f = fit(Family::Ss, &data, None).unwrap();
        assert!(f.converged);
        let PathLossModel::SingleSlope(p) = f.model else { panic!() };
        assert!((p.l_ref - 57.34).abs() < 0.5, "{p:?}");
        assert!((p.gamma - 2.69).abs() < 0.05, "{p:?}");
        assert!((p.sigma - 4.5).abs() < 0.15, "{p:?}");
        assert!((f.bic - (3.0 * (f.n_total as f64).ln() - 2.0 * f.log_likelihood)).abs() < 1e-9);
    }

    #[test]
    fn per_class_sums_three_fits() {
        let truth = reference::per_class();
        let data = synth(&truth, 4500, (5.0, 500.0), f64::INFINITY, 5);
        let f = fit(Family::PerClass, &data, None).unwrap();
        let PathLossModel::PerClass(p) = f.model else { panic!() };
        assert!((p.nlos.gamma - 2.91).abs() < 0.1);
        assert!((p.los.sigma - 3.3).abs() < 0.2);
        let parts: f64 = LinkClass::LABELLED
            .iter()
            .map(|&c| {
                let sub = data.filter_link(c);
                let ss = PathLossModel::SingleSlope(*p.class(c).unwrap());
                censored_log_likelihood(&ss, &sub).unwrap()
            })
            .sum();
        assert!((parts - f.log_likelihood).abs() < 1e-6);
        assert!((f.bic - (9.0 * (f.n_total as f64).ln() - 2.0 * f.log_likelihood)).abs() < 1e-9);
    }

    #[test]
    fn per_class_errors() {
        let truth = reference::per_class();
        let data = synth(&truth, 300, (5.0, 500.0), f64::INFINITY, 5);
        let no_nlos = Dataset::new(
            data.records().iter().filter(|r| r.link != LinkClass::Nlos).cloned().collect(),
            f64::INFINITY,
        )
        .unwrap();
        assert!(matches!(fit(Family::PerClass, &no_nlos, None), Err(Error::InsufficientClassData(LinkClass::Nlos))));

        let mut recs = data.into_records();
        recs[0].link = LinkClass::Unknown;
        let unknown = Dataset::new(recs, f64::INFINITY).unwrap();
        assert!(matches!(fit(Family::PerClass, &unknown, None), Err(Error::LinkClassRequired)));
    }

    #[test]
    fn double_slope_needs_breakpoint() {
        let data = synth(&reference::dsds(), 200, (5.0, 500.0), f64::INFINITY, 1);
        assert!(fit(Family::Dsds, &data, None).is_err());
        assert!(fit(Family::Dsss, &data, Some(-3.0)).is_err());
    }

    #[test]
    fn all_censored_is_an_error() {
        let data = synth(&reference::dsds(), 200, (5.0, 500.0), 0.0, 1);
        assert_eq!(data.n_censored(), 200);
        for family in Family::ALL {
            assert!(fit(family, &data, Some(35.0)).is_err());
        }
    }

    #[test]
    fn singleton_sweep_equals_fit() {
        let data = synth(&reference::dsds(), 2000, (5.0, 1000.0), 110.6, 2);
        let sweep = sweep_breakpoint(Family::Dsds, &data, &[35.0]).unwrap();
        assert_eq!(sweep.len(), 1);
        let direct = fit(Family::Dsds, &data, Some(35.0)).unwrap();
        assert_eq!(sweep[0].outcome.as_ref().unwrap(), &direct);
        assert!(sweep_breakpoint(Family::Dsds, &data, &[]).is_err());
        assert!(sweep_breakpoint(Family::Ss, &data, &[35.0]).is_err());
        assert!(sweep_breakpoint(Family::Dsss, &data, &[0.0]).is_err());
    }

    #[test]
    fn sweep_records_per_candidate_failures() {
        // no uncensored samples beyond 3000 m: the third regressor is constant
        let data = synth(&reference::dsds(), 500, (5.0, 600.0), f64::INFINITY, 4);
        let sweep = sweep_breakpoint(Family::Dsss, &data, &[35.0, 3000.0]).unwrap();
        assert!(sweep[0].outcome.is_ok());
        assert!(sweep[1].outcome.is_err());
    }
}
