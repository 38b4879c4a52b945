//! Fits all four families to one simulated campaign, sweeping the
//! breakpoint of the double-slope families, and ranks them by BIC.
//!
//! cargo run --release --example compare_models

use v2v_fading::censored::{compare, FitOptions};
use v2v_fading::io::parse_sweep;
use v2v_fading::pathloss::reference;
use v2v_fading::shadowing::Domain;
use v2v_fading::sim::{simulate_campaign, ShadowingProcess, TrajectorySpec};

fn main() -> v2v_fading::Result<()> {
    let traj = TrajectorySpec::campaign("day", 330.0, 10.0);
    let shadow = ShadowingProcess::model_driven(0.001, Domain::Time, 4)?;
    let data = simulate_campaign(&reference::dsds(), &traj, &shadow, reference::CENSOR_LEVEL_DAY, 11)?;

    let sweep = parse_sweep("15:5:100")?;
    let cmp = compare(&data, &sweep, &FitOptions::default())?;
    for entry in &cmp.dsds {
        if let Ok(f) = &entry.outcome {
            println!("dsds d_break {:5.1}  BIC {:10.2}", entry.d_break, f.bic);
        }
    }
    println!();
    for (rank, f) in cmp.ranked().iter().enumerate() {
        let d_b = f.model.d_break().map_or("-".to_string(), |d| format!("{d:.0}"));
        println!("{} {:<10} d_break {:>4}  k {}  BIC {:10.2}", rank + 1, f.family().as_str(), d_b, f.model.parameter_count(), f.bic);
    }
    Ok(())
}
