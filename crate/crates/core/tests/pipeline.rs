//! Round trips between the simulator, the file formats and the estimators.

use v2v_fading::censored::{self, Dataset};
use v2v_fading::fusion::{DistanceFuser, DistanceSource};
use v2v_fading::io::{self, SensorErrors};
use v2v_fading::pathloss::{reference, Family, LinkClass, PathLossModel};
use v2v_fading::shadowing::{extract_residuals, Domain};
use v2v_fading::sim::{corrupt_distances, simulate_campaign, CorruptionConfig, Schedule, ShadowingProcess, TrajectorySpec};

fn day_run(run_id: &str, duration: f64, seed: u64) -> Dataset {
    let p = ShadowingProcess::model_driven(7.6, Domain::Time, 3).unwrap();
    let mut traj = TrajectorySpec::campaign(run_id, duration, 12.0);
    traj.link = Schedule { steps: vec![(0.0, LinkClass::Los), (40.0, LinkClass::Olos), (70.0, LinkClass::Nlos)], period: Some(100.0) };
    simulate_campaign(&reference::dsds(), &traj, &p, reference::CENSOR_LEVEL_DAY, seed).unwrap()
}

#[test]
fn simulator_output_ingests_without_rejects() {
    let data = Dataset::concat(vec![day_run("a", 660.0, 1), day_run("b", 330.0, 2)]).unwrap();
    assert!(data.n_censored() > 0);
    let mut buf = Vec::new();
    io::write_processed(&data, &mut buf).unwrap();
    let back = io::read_processed(buf.as_slice(), reference::CENSOR_LEVEL_DAY).unwrap();
    assert!(back.rejects.is_empty(), "{:?}", &back.rejects[..back.rejects.len().min(3)]);
    assert_eq!(back.dataset, data);

    let mut again = Vec::new();
    io::write_processed(&back.dataset, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn residuals_survive_the_file_round_trip() {
    let m = reference::dsds();
    let data = day_run("a", 120.0, 4);
    let mut buf = Vec::new();
    io::write_processed(&data, &mut buf).unwrap();
    let back = io::read_processed(buf.as_slice(), reference::CENSOR_LEVEL_DAY).unwrap().strict().unwrap();
    assert_eq!(extract_residuals(&m, &back).unwrap(), extract_residuals(&m, &data).unwrap());
}

#[test]
fn raw_streams_round_trip_through_files() {
    let data = day_run("a", 200.0, 5);
    let raw = corrupt_distances(&data, &CorruptionConfig::default(), 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = io::write_raw(&raw, dir.path()).unwrap();
    let back = io::ingest_raw(&paths, SensorErrors::default()).unwrap();
    assert_eq!(back, raw);

    let a = DistanceFuser::new(&raw, 40.0).unwrap();
    let b = DistanceFuser::new(&back, 40.0).unwrap();
    for r in data.records().iter().step_by(97) {
        assert_eq!(a.fuse(r.t).unwrap(), b.fuse(r.t).unwrap());
    }
}

#[test]
fn fused_distances_keep_the_fit_close() {
    // fitting against fused rather than true distances
    let data = {
        let p = ShadowingProcess::model_driven(1e-3, Domain::Time, 2).unwrap();
        let traj = TrajectorySpec::campaign("a", 660.0, 10.0);
        simulate_campaign(&reference::dsds(), &traj, &p, reference::CENSOR_LEVEL_DAY, 9).unwrap()
    };
    let raw = corrupt_distances(&data, &CorruptionConfig::default(), 10).unwrap();
    let fuser = DistanceFuser::new(&raw, 40.0).unwrap();
    let mut fused_records = Vec::new();
    let mut n_fused = 0;
    for r in data.records() {
        let f = fuser.fuse(r.t).unwrap();
        if f.source == DistanceSource::Fused {
            n_fused += 1;
        }
        let mut r = r.clone();
        r.d = f.d.max(1.0);
        fused_records.push(r);
    }
    assert!(n_fused > 0);
    let fused = Dataset::new(fused_records, reference::CENSOR_LEVEL_DAY).unwrap();
    let fit = censored::fit(Family::Dsds, &fused, Some(35.0)).unwrap();
    let PathLossModel::DoubleSlope(p) = fit.model else { unreachable!() };
    assert!((p.gamma2 - 3.14).abs() < 0.15, "{p:?}");
    assert!((p.l_ref - 59.8).abs() < 1.0, "{p:?}");
}

#[test]
fn dsss_and_dsds_differ_only_in_sigma() {
    let data = day_run("a", 660.0, 11);
    let a = censored::fit(Family::Dsss, &data, Some(35.0)).unwrap();
    let b = censored::fit(Family::Dsds, &data, Some(35.0)).unwrap();
    // the nested model cannot beat the larger one in likelihood
    assert!(b.log_likelihood >= a.log_likelihood - 1e-6);
    assert_eq!(a.model.parameter_count() + 1, b.model.parameter_count());
}
