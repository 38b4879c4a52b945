//! Command-line surface. Argument types live here so the commands can be
//! driven from tests; `main.rs` only parses, sets up logging and maps the
//! outcome to an exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use crate::censored::{self, Dataset, FitOptions, FitResult, MeasurementRecord};
use crate::error::{Error, Result};
use crate::fusion::{DistanceFuser, DistanceSource};
use crate::io::{
    self, parse_bins, parse_sweep, write_json, CampaignConfig, Provenance, RawPaths, Report, SensorErrors,
};
use crate::pathloss::{Family, LinkClass, PathLossModel};
use crate::shadowing::{self, Domain, SigmaBin, SpeedBucketTable};
use crate::sim;

#[derive(Debug, Parser)]
#[command(name = "v2v-fading", version, about = "V2V large-scale fading estimation toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Campaign configuration JSON; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Censoring level, dB.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub censor_level: Option<f64>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,
    /// Skip invalid input rows with a warning instead of failing.
    #[arg(long, global = true)]
    pub lenient: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a campaign from the config's `synth` section.
    Synth(SynthArgs),
    /// Fuse raw GPS/UWB streams into a processed campaign file.
    Fuse(FuseArgs),
    /// Censored maximum-likelihood fit of one model family.
    Fit(FitArgs),
    /// Fit all families with a breakpoint sweep and rank them by BIC.
    Compare(CompareArgs),
    /// Shadowing autocorrelation and exponential decorrelation fit.
    Autocorr(AutocorrArgs),
    /// Shadowing standard deviation per distance bin.
    SigmaBins(SigmaBinsArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Also write raw sensor streams, one sub-directory per run.
    #[arg(long)]
    pub raw_dir: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub gps_tx: PathBuf,
    #[arg(long)]
    pub gps_rx: PathBuf,
    #[arg(long)]
    pub uwb: PathBuf,
    #[arg(long)]
    pub rf: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "run1")]
    pub run_id: String,
    /// UWB influence half-window, seconds.
    #[arg(long)]
    pub window: Option<f64>,
    /// RF samples per power-averaging window.
    #[arg(long)]
    pub averaging_window: Option<usize>,
    #[arg(long, default_value_t = crate::fusion::DEFAULT_UWB_BIAS)]
    pub uwb_bias: f64,
    #[arg(long, default_value_t = crate::fusion::DEFAULT_GPS_SIGMA)]
    pub gps_sigma: f64,
    #[arg(long, default_value_t = crate::fusion::DEFAULT_UWB_SIGMA)]
    pub uwb_sigma: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub family: Family,
    /// Breakpoint, meters; required for dsss and dsds.
    #[arg(long)]
    pub d_break: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Breakpoint grid `start:step:stop`, meters; defaults to the config.
    #[arg(long)]
    pub sweep: Option<String>,
    /// BIC per breakpoint and family.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AutocorrArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Fit report, fit result or bare model JSON.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long, default_value = "distance")]
    pub domain: Domain,
    /// Grid step; 0.5 m or 16.5 ms by default.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub max_lag: Option<f64>,
    /// Decorrelation time per speed cell instead of a single curve.
    #[arg(long)]
    pub buckets: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SigmaBinsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub fit: PathBuf,
    /// Comma-separated `lo:hi` distance bins, meters.
    #[arg(long, default_value = "0:10,10:20,20:35,35:50,50:100,100:200,200:500,500:2000")]
    pub bins: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Output was written but an optimiser did not converge.
    NotConverged,
}

/// 0 success, 1 IO failure, 2 invalid input, 3 non-convergence.
pub fn exit_code(outcome: &Result<Status>) -> i32 {
    match outcome {
        Ok(Status::Ok) => 0,
        Ok(Status::NotConverged) => 3,
        Err(Error::Io(_)) => 1,
        Err(Error::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 1,
        Err(_) => 2,
    }
}

struct Context {
    cfg: CampaignConfig,
    seed: u64,
    lenient: bool,
}

impl Context {
    fn new(common: &CommonArgs) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => CampaignConfig::load(p)?,
            None => CampaignConfig::default(),
        };
        if let Some(c) = common.censor_level {
            cfg.censor_level = c;
        }
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(Self { seed: cfg.seed, cfg, lenient: common.lenient })
    }

    fn load_data(&self, path: &Path) -> Result<Dataset> {
        let ingested = io::ingest_processed(path, self.cfg.censor_level)?;
        if self.lenient {
            for r in &ingested.rejects {
                warn!("{}: skipped {r}", path.display());
            }
            if ingested.dataset.is_empty() {
                return Err(Error::EmptyDataset);
            }
            Ok(ingested.dataset)
        } else {
            ingested.strict()
        }
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions { seed: self.seed, ..FitOptions::default() }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_report<T: Serialize>(path: &Path, seed: u64, inputs: &[&Path], body: T) -> Result<()> {
    let report = Report { provenance: Provenance::new(seed, inputs)?, body };
    let mut w = create(path)?;
    write_json(&report, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a path-loss model from a fit report, a fit result or a bare model.
pub fn load_model(path: &Path) -> Result<PathLossModel> {
    let value: serde_json::Value = serde_json::from_slice(&std::fs::read(path)?)?;
    let model = value.get("fit").and_then(|f| f.get("model")).or_else(|| value.get("model")).unwrap_or(&value);
    Ok(serde_json::from_value(model.clone())?)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Status> {
    let ctx = Context::new(&cli.common)?;
    match &cli.command {
        Command::Synth(a) => synth(&ctx, cli.common.config.as_deref(), a),
        Command::Fuse(a) => fuse(&ctx, a),
        Command::Fit(a) => fit(&ctx, a),
        Command::Compare(a) => compare(&ctx, a, stdout),
        Command::Autocorr(a) => autocorr(&ctx, a, stdout),
        Command::SigmaBins(a) => sigma_bins(&ctx, a),
    }
}

#[derive(Serialize)]
struct SynthSummary {
    runs: usize,
    samples: usize,
    censored_fraction: f64,
}

fn synth(ctx: &Context, config_path: Option<&Path>, a: &SynthArgs) -> Result<Status> {
    let s = ctx.cfg.synth.as_ref().ok_or_else(|| Error::domain("synth needs a config with a `synth` section"))?;
    let process = s.shadowing.process(ctx.seed)?;
    let mut runs = Vec::with_capacity(s.trajectories.len());
    for (i, traj) in s.trajectories.iter().enumerate() {
        let data = sim::simulate_campaign(&s.model, traj, &process, ctx.cfg.censor_level, i as u64)?;
        if let (Some(dir), Some(c)) = (&a.raw_dir, &s.corruption) {
            let raw = sim::corrupt_distances(&data, c, ctx.seed.wrapping_add(i as u64 + 1))?;
            io::write_raw(&raw, dir.join(&traj.run_id))?;
        }
        runs.push(data);
    }
    if a.raw_dir.is_some() && s.corruption.is_none() {
        warn!("--raw-dir given but the config has no corruption section; no raw streams written");
    }
    let data = Dataset::concat(runs)?;
    info!("simulated {} samples, {:.1}% censored", data.len(), 100.0 * data.censored_fraction());
    let mut w = create(&a.out)?;
    io::write_processed(&data, &mut w)?;
    w.flush()?;
    if let Some(r) = &a.report {
        let inputs: Vec<&Path> = config_path.into_iter().collect();
        let summary = SynthSummary {
            runs: s.trajectories.len(),
            samples: data.len(),
            censored_fraction: data.censored_fraction(),
        };
        write_report(r, ctx.seed, &inputs, summary)?;
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct FuseSummary {
    samples: usize,
    fused: usize,
    gps_only: usize,
    outside_gps_span: usize,
    dropped_uwb: usize,
}

fn fuse(ctx: &Context, a: &FuseArgs) -> Result<Status> {
    let paths = RawPaths { gps_tx: a.gps_tx.clone(), gps_rx: a.gps_rx.clone(), uwb: a.uwb.clone(), rf: a.rf.clone() };
    let errors = SensorErrors { uwb_cable_bias: a.uwb_bias, gps_sigma: a.gps_sigma, uwb_sigma: a.uwb_sigma };
    let raw = io::ingest_raw(&paths, errors)?;
    let window = a.window.unwrap_or(ctx.cfg.fusion_window);
    let fuser = DistanceFuser::new(&raw, window)?;
    let averaged = io::preaverage_path_loss(&raw.rf_samples, a.averaging_window.unwrap_or(ctx.cfg.averaging_window))?;

    let mut records = Vec::with_capacity(averaged.len());
    let mut sources = Vec::with_capacity(averaged.len());
    let mut outside = 0;
    for s in &averaged {
        if !fuser.track().contains(s.t) {
            outside += 1;
            continue;
        }
        let f = fuser.fuse(s.t)?;
        let (v_rx, v_tx) = fuser.track().speeds_at(s.t);
        records.push(MeasurementRecord {
            run_id: a.run_id.clone(),
            t: s.t,
            d: f.d,
            path_loss: s.path_loss,
            censored: false,
            link: LinkClass::Unknown,
            v_tx,
            v_rx,
        });
        sources.push(f.source);
    }
    if outside > 0 {
        warn!("{outside} RF samples outside the GPS span were skipped");
    }
    if let Some(r) = records.iter().find(|r| !(r.d > 0.0)) {
        return Err(Error::domain(format!("fused distance {} m at t={} s is not positive", r.d, r.t)));
    }
    let data = Dataset::new(records, ctx.cfg.censor_level)?;
    let fused = sources.iter().filter(|s| **s == DistanceSource::Fused).count();
    info!("{} samples, {fused} with UWB corrections", data.len());
    let mut w = create(&a.out)?;
    io::write_processed_with_sources(&data, &sources, &mut w)?;
    w.flush()?;
    if let Some(r) = &a.report {
        let summary = FuseSummary {
            samples: data.len(),
            fused,
            gps_only: data.len() - fused,
            outside_gps_span: outside,
            dropped_uwb: fuser.dropped_uwb(),
        };
        write_report(r, ctx.seed, &paths.all(), summary)?;
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct FitBody<'a> {
    censor_level: f64,
    fit: &'a FitResult,
}

fn fit(ctx: &Context, a: &FitArgs) -> Result<Status> {
    let data = ctx.load_data(&a.data)?;
    let result = censored::fit_with(a.family, &data, a.d_break, &ctx.fit_options())?;
    info!("{} fit: BIC {:.2}, RMSE {:.3} dB", a.family, result.bic, result.rmse);
    write_report(&a.out, ctx.seed, &[&a.data], FitBody { censor_level: data.censor_level(), fit: &result })?;
    if result.converged {
        Ok(Status::Ok)
    } else {
        warn!("optimiser did not converge");
        Ok(Status::NotConverged)
    }
}

fn cell(outcome: Option<&Result<FitResult>>) -> String {
    match outcome {
        Some(Ok(f)) => f.bic.to_string(),
        _ => "-".to_string(),
    }
}

#[derive(Serialize)]
struct CompareBody<'a> {
    candidates: &'a [f64],
    ranked: Vec<&'a FitResult>,
}

fn compare(ctx: &Context, a: &CompareArgs, stdout: &mut dyn Write) -> Result<Status> {
    let data = ctx.load_data(&a.data)?;
    let candidates = match &a.sweep {
        Some(s) => parse_sweep(s)?,
        None => ctx.cfg.breakpoint_candidates.clone(),
    };
    let cmp = censored::compare(&data, &candidates, &ctx.fit_options())?;
    for (name, r) in [("ss", &cmp.ss), ("per_class", &cmp.per_class)] {
        if let Err(e) = r {
            warn!("{name} not fitted: {e}");
        }
    }

    let mut w = csv::Writer::from_writer(create(&a.out)?);
    w.write_record(["d_break_m", "ss", "per_class", "dsss", "dsds"])?;
    for (i, d) in candidates.iter().enumerate() {
        w.write_record([
            d.to_string(),
            cell(Some(&cmp.ss)),
            cell(Some(&cmp.per_class)),
            cell(cmp.dsss.get(i).map(|e| &e.outcome)),
            cell(cmp.dsds.get(i).map(|e| &e.outcome)),
        ])?;
    }
    w.flush()?;

    let ranked = cmp.ranked();
    writeln!(stdout, "{:<4} {:<10} {:>9} {:>2} {:>16} {:>14} {:>8} {:>9}", "rank", "family", "d_break_m", "k", "log_likelihood", "bic", "rmse_db", "converged")?;
    for (i, f) in ranked.iter().enumerate() {
        let d_break = f.model.d_break().map_or_else(|| "-".to_string(), |d| d.to_string());
        writeln!(
            stdout,
            "{:<4} {:<10} {:>9} {:>2} {:>16.3} {:>14.3} {:>8.4} {:>9}",
            i + 1,
            f.family().as_str(),
            d_break,
            f.model.parameter_count(),
            f.log_likelihood,
            f.bic,
            f.rmse,
            f.converged
        )?;
    }
    if ranked.is_empty() {
        return Err(Error::InsufficientData("no model family could be fitted".into()));
    }
    if let Some(r) = &a.report {
        write_report(r, ctx.seed, &[&a.data], CompareBody { candidates: &candidates, ranked: ranked.clone() })?;
    }
    Ok(if cmp.all_converged() { Status::Ok } else { Status::NotConverged })
}

#[derive(Serialize)]
struct AutocorrBody {
    domain: Domain,
    spacing: f64,
    max_lag: f64,
    sigma2: f64,
    fitted_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buckets: Option<SpeedBucketTable>,
}

fn autocorr(ctx: &Context, a: &AutocorrArgs, stdout: &mut dyn Write) -> Result<Status> {
    let data = ctx.load_data(&a.data)?;
    let model = load_model(&a.fit)?;
    let (default_spacing, default_lag) = match a.domain {
        Domain::Distance => (shadowing::DEFAULT_DISTANCE_SPACING, shadowing::DEFAULT_DISTANCE_MAX_LAG),
        Domain::Time => (shadowing::DEFAULT_TIME_SPACING, shadowing::DEFAULT_TIME_MAX_LAG),
    };
    let spacing = a.spacing.unwrap_or(default_spacing);
    let max_lag = a.max_lag.or(ctx.cfg.lag_max).unwrap_or(default_lag);
    let blocks = shadowing::resample_all(&shadowing::extract_residuals(&model, &data)?, a.domain, spacing)?;
    let unit = a.domain.unit();

    if a.buckets {
        if a.domain != Domain::Time {
            return Err(Error::DomainMismatch("--buckets needs --domain time".into()));
        }
        let cfg = shadowing::BucketConfig { max_lag, ..ctx.cfg.speed_bins.clone() };
        let table = shadowing::bucketed_decorrelation(&blocks, &data, &cfg)?;
        let mut w = create(&a.out)?;
        table.write_csv(&mut w)?;
        w.flush()?;
        table.write_csv(&mut *stdout)?;
        if let Some(r) = &a.report {
            let body = AutocorrBody { domain: a.domain, spacing, max_lag, sigma2: f64::NAN, fitted_scale: None, buckets: Some(table) };
            write_report(r, ctx.seed, &[&a.data, &a.fit], body)?;
        }
        return Ok(Status::Ok);
    }

    let est = shadowing::fit_gudmundson(&shadowing::autocorrelation(&blocks, max_lag)?)?;
    let scale = est.fitted_scale.expect("fitted");
    writeln!(stdout, "decorrelation {} = {scale:.3} {unit} (sigma {:.3} dB)", if a.domain == Domain::Time { "time" } else { "distance" }, est.sigma2.sqrt())?;
    let mut w = create(&a.out)?;
    est.write_csv(&mut w)?;
    w.flush()?;
    if let Some(r) = &a.report {
        let body = AutocorrBody { domain: a.domain, spacing, max_lag, sigma2: est.sigma2, fitted_scale: Some(scale), buckets: None };
        write_report(r, ctx.seed, &[&a.data, &a.fit], body)?;
    }
    Ok(Status::Ok)
}

fn sigma_bins(ctx: &Context, a: &SigmaBinsArgs) -> Result<Status> {
    let data = ctx.load_data(&a.data)?;
    let model = load_model(&a.fit)?;
    let bins: Vec<SigmaBin> = shadowing::sigma_vs_distance(&model, &data, &parse_bins(&a.bins)?)?;
    let mut w = create(&a.out)?;
    shadowing::write_sigma_bins_csv(&bins, &mut w)?;
    w.flush()?;
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(Status::Ok)), 0);
        assert_eq!(exit_code(&Ok(Status::NotConverged)), 3);
        assert_eq!(exit_code(&Err(Error::Io(std::io::Error::other("x")))), 1);
        assert_eq!(exit_code(&Err(Error::EmptyDataset)), 2);
        assert_eq!(exit_code(&Err(Error::Validation(vec![]))), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_spec_style_invocations() {
        let cli = Cli::try_parse_from(["v2v-fading", "compare", "--data", "p.csv", "--sweep", "15:5:100", "--out", "bic.csv", "--seed", "4"]).unwrap();
        assert_eq!(cli.common.seed, Some(4));
        let cli = Cli::try_parse_from(["v2v-fading", "fit", "--data", "p.csv", "--family", "per_class", "--out", "f.json"]).unwrap();
        assert!(matches!(cli.command, Command::Fit(FitArgs { family: Family::PerClass, .. })));
        assert!(Cli::try_parse_from(["v2v-fading", "fit", "--data", "p.csv", "--family", "triple", "--out", "f.json"]).is_err());
    }
}
