//! Corrupts the true separation of a simulated run into GPS fixes and UWB
//! ranges, then compares GPS-only and fused distance errors.
//!
//! cargo run --release --example distance_fusion

use v2v_fading::fusion::{DistanceFuser, DistanceSource, DEFAULT_FUSION_WINDOW};
use v2v_fading::pathloss::reference;
use v2v_fading::shadowing::Domain;
use v2v_fading::sim::{corrupt_distances, simulate_campaign, CorruptionConfig, ShadowingProcess, TrajectorySpec};

fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

fn main() -> v2v_fading::Result<()> {
    let traj = TrajectorySpec::campaign("run", 1320.0, 10.0);
    let shadow = ShadowingProcess::model_driven(7.6, Domain::Time, 1)?;
    let data = simulate_campaign(&reference::dsds(), &traj, &shadow, reference::CENSOR_LEVEL_DAY, 2)?;
    let raw = corrupt_distances(&data, &CorruptionConfig::default(), 3)?;
    println!("{} GPS fixes per car, {} UWB ranges", raw.gps_rx.len(), raw.uwb.len());

    let fuser = DistanceFuser::new(&raw, DEFAULT_FUSION_WINDOW)?;
    println!("{} UWB ranges dropped as implausible", fuser.dropped_uwb());
    let (mut gps_err, mut fused_err) = (Vec::new(), Vec::new());
    for r in data.records().iter().step_by(10) {
        let f = fuser.fuse(r.t)?;
        if f.source == DistanceSource::Fused && r.d < 100.0 {
            gps_err.push(fuser.track().distance_at(r.t)? - r.d);
            fused_err.push(f.d - r.d);
        }
    }
    println!(
        "within UWB range ({} queries): GPS-only RMS error {:.2} m, fused {:.3} m",
        gps_err.len(),
        rms(&gps_err),
        rms(&fused_err)
    );
    Ok(())
}
