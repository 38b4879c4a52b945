//! Writes a simulated campaign in the processed CSV format, reads it back
//! with validation and reports the shadowing spread per distance bin.
//!
//! cargo run --example campaign_csv

use std::fs::File;

use v2v_fading::io::{ingest_processed, parse_bins, write_processed};
use v2v_fading::pathloss::reference;
use v2v_fading::shadowing::{sigma_vs_distance, Domain};
use v2v_fading::sim::{simulate_campaign, ShadowingProcess, TrajectorySpec};

fn main() -> v2v_fading::Result<()> {
    let model = reference::dsds();
    let traj = TrajectorySpec::campaign("csv", 660.0, 10.0);
    let shadow = ShadowingProcess::model_driven(7.6, Domain::Time, 6)?;
    let data = simulate_campaign(&model, &traj, &shadow, reference::CENSOR_LEVEL_DAY, 12)?;

    let path = std::env::temp_dir().join("v2v_fading_campaign.csv");
    write_processed(&data, File::create(&path)?)?;
    let ingested = ingest_processed(&path, reference::CENSOR_LEVEL_DAY)?;
    println!("{}: {} rows, {} rejected", path.display(), ingested.dataset.len(), ingested.rejects.len());
    assert_eq!(ingested.dataset, data);

    let bins = parse_bins("0:35,35:100,100:500,500:2000")?;
    for b in sigma_vs_distance(&model, &ingested.dataset, &bins)? {
        let sigma = b.sigma.map_or("-".to_string(), |s| format!("{s:.2}"));
        println!("{:>5}-{:<5} m  n {:>6}  sigma {sigma} dB", b.lo, b.hi, b.n);
    }
    Ok(())
}
