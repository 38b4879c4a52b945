use crate::censored::{Dataset, MeasurementRecord};
use crate::error::{Error, Result};
use crate::pathloss::PathLossModel;
use crate::shadowing::Domain;
use crate::sim::process::ShadowingProcess;
use crate::sim::trajectory::TrajectorySpec;

/// Simulates one run: deterministic path loss from `model` plus correlated
/// shadowing from `shadow`, sampled along `traj`.
///
/// `shadow` is cloned and restarted on stream `seed`, so one process template
/// yields independent runs for distinct seeds. Censored samples keep their
/// simulated path loss and are only flagged.
pub fn simulate_campaign(
    model: &PathLossModel,
    traj: &TrajectorySpec,
    shadow: &ShadowingProcess,
    censor_level: f64,
    seed: u64,
) -> Result<Dataset> {
    model.validate()?;
    traj.validate()?;
    if shadow.domain() == Domain::Distance && traj.v_rx.values().all(|v| v == 0.0) {
        return Err(Error::DomainMismatch("distance-domain shadowing needs a moving receiver".into()));
    }
    let mut proc = shadow.clone().with_stream(seed);
    let n = traj.sample_count();
    let dt = traj.sample_period;
    let mut records = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let d = traj.distance.at(t);
        let link = traj.link.at(t);
        let v_rx = traj.v_rx.at(t);
        let delta = match (k, proc.domain()) {
            (0, _) => 0.0,
            (_, Domain::Time) => dt,
            (_, Domain::Distance) => v_rx.abs() * dt,
        };
        if proc.follows_model() {
            proc.set_sigma(model.shadowing_sigma(d, link)?);
        }
        let x = proc.step(delta);
        records.push(MeasurementRecord {
            run_id: traj.run_id.clone(),
            t,
            d,
            path_loss: model.mean_path_loss(d, link)? + x,
            censored: false,
            link,
            v_tx: traj.v_tx.at(t),
            v_rx,
        });
    }
    Dataset::new(records, censor_level)
}
