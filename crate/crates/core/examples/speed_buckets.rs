//! Decorrelation time per receiver-speed and relative-speed cell, for runs
//! simulated with different scales per speed.
//!
//! cargo run --release --example speed_buckets

use v2v_fading::censored::Dataset;
use v2v_fading::pathloss::reference;
use v2v_fading::shadowing::{
    bucketed_decorrelation, extract_residuals, resample_all, BucketConfig, Domain, DEFAULT_TIME_SPACING,
};
use v2v_fading::sim::{simulate_campaign, Schedule, ShadowingProcess, TrajectorySpec};

fn main() -> v2v_fading::Result<()> {
    let model = reference::dsds();
    let cells = [(5.0, 5.0, 8.8), (15.0, 15.0, 3.3), (15.0, 25.0, 5.9), (25.0, 25.0, 3.5)];
    let mut runs = Vec::new();
    for (i, &(v_rx, v_tx, t_c)) in cells.iter().enumerate() {
        let mut traj = TrajectorySpec::campaign(&format!("run{i}"), 1800.0, v_rx);
        traj.v_tx = Schedule::constant(v_tx);
        let shadow = ShadowingProcess::model_driven(t_c, Domain::Time, 9)?.with_stream(i as u64);
        runs.push(simulate_campaign(&model, &traj, &shadow, reference::CENSOR_LEVEL_DAY, 100 + i as u64)?);
    }
    let data = Dataset::concat(runs)?;

    let grid = resample_all(&extract_residuals(&model, &data)?, Domain::Time, DEFAULT_TIME_SPACING)?;
    let table = bucketed_decorrelation(&grid, &data, &BucketConfig::default())?;
    table.write_csv(std::io::stdout())?;
    println!("simulated: {cells:?}");
    Ok(())
}
