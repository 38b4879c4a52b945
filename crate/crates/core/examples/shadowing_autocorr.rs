//! Recovers the decorrelation distance of simulated shadowing from the
//! residuals of a known model.
//!
//! cargo run --release --example shadowing_autocorr

use v2v_fading::pathloss::reference;
use v2v_fading::shadowing::{
    autocorrelation, extract_residuals, fit_gudmundson, resample_all, Domain, DEFAULT_DISTANCE_MAX_LAG,
    DEFAULT_DISTANCE_SPACING,
};
use v2v_fading::sim::{simulate_campaign, ShadowingProcess, TrajectorySpec};

fn main() -> v2v_fading::Result<()> {
    let model = reference::dsds();
    // two hours at 25 m/s
    let traj = TrajectorySpec::campaign("drive", 7200.0, 25.0);
    let shadow = ShadowingProcess::model_driven(159.0, Domain::Distance, 3)?;
    let data = simulate_campaign(&model, &traj, &shadow, reference::CENSOR_LEVEL_DAY, 5)?;

    let blocks = extract_residuals(&model, &data)?;
    let grid = resample_all(&blocks, Domain::Distance, DEFAULT_DISTANCE_SPACING)?;
    let est = fit_gudmundson(&autocorrelation(&grid, DEFAULT_DISTANCE_MAX_LAG)?)?;
    let d_c = est.fitted_scale.expect("fitted");

    println!("{} blocks, sigma {:.2} dB", grid.len(), est.sigma2.sqrt());
    for lag in [0.0, 50.0, 100.0, 159.0, 300.0, 600.0] {
        let k = (lag / est.spacing) as usize;
        if let Some(r) = est.normalized().get(k) {
            println!("lag {lag:5.0} m  R {:6.3}  model {:6.3}  pairs {}", r, (-lag / d_c).exp(), est.n_per_lag[k]);
        }
    }
    println!("decorrelation distance {d_c:.1} m (simulated 159 m)");
    Ok(())
}
