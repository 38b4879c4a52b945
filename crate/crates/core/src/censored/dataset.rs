use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathloss::LinkClass;

/// One time-stamped path-loss sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub run_id: String,
    /// Seconds, monotone within a run.
    pub t: f64,
    /// Fused TX-RX distance, meters.
    pub d: f64,
    pub path_loss: f64,
    pub censored: bool,
    pub link: LinkClass,
    pub v_tx: f64,
    pub v_rx: f64,
}

/// Measurement records plus the censoring level of the instrument that
/// produced them.
///
/// Records are kept sorted by `(run_id, t)` and `censored` always equals
/// `path_loss >= censor_level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<MeasurementRecord>,
    censor_level: f64,
}

impl Dataset {
    /// Builds a dataset, sorting records and deriving censoring flags from
    /// `censor_level`. `f64::INFINITY` disables censoring.
    pub fn new(mut records: Vec<MeasurementRecord>, censor_level: f64) -> Result<Self> {
        if censor_level.is_nan() || censor_level == f64::NEG_INFINITY {
            return Err(Error::domain("censor level must be finite or +inf"));
        }
        for r in &records {
            if !(r.d > 0.0 && r.d.is_finite()) {
                return Err(Error::domain(format!("run {} t={}: distance must be > 0, got {}", r.run_id, r.t, r.d)));
            }
            if !r.t.is_finite() {
                return Err(Error::domain(format!("run {}: non-finite timestamp", r.run_id)));
            }
            if r.path_loss.is_nan() {
                return Err(Error::domain(format!("run {} t={}: path loss is NaN", r.run_id, r.t)));
            }
        }
        for r in &mut records {
            r.censored = r.path_loss >= censor_level;
        }
        records.sort_by(|a, b| a.run_id.cmp(&b.run_id).then(a.t.total_cmp(&b.t)));
        Ok(Self { records, censor_level })
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<MeasurementRecord> {
        self.records
    }

    pub fn censor_level(&self) -> f64 {
        self.censor_level
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_censored(&self) -> usize {
        self.records.iter().filter(|r| r.censored).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.n_censored() as f64 / self.records.len() as f64
        }
    }

    /// Records restricted to one link class, sharing this dataset's censor level.
    pub fn filter_link(&self, link: LinkClass) -> Dataset {
        Dataset {
            records: self.records.iter().filter(|r| r.link == link).cloned().collect(),
            censor_level: self.censor_level,
        }
    }

    /// The dataset an instrument would report if censoring were ignored:
    /// censored samples read as the censor level and are treated as exact.
    pub fn without_censoring(&self) -> Dataset {
        let records = self
            .records
            .iter()
            .map(|r| MeasurementRecord {
                path_loss: if r.censored { self.censor_level } else { r.path_loss },
                censored: false,
                ..r.clone()
            })
            .collect();
        Dataset { records, censor_level: f64::INFINITY }
    }

    /// Distinct run identifiers in sorted order.
    pub fn run_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.records.iter().map(|r| r.run_id.as_str()).collect();
        ids.dedup();
        ids
    }

    /// Contiguous slices of records, one per run.
    pub fn runs(&self) -> impl Iterator<Item = &[MeasurementRecord]> {
        self.records.chunk_by(|a, b| a.run_id == b.run_id)
    }

    pub fn concat(datasets: Vec<Dataset>) -> Result<Dataset> {
        let Some(level) = datasets.first().map(|d| d.censor_level) else {
            return Err(Error::EmptyDataset);
        };
        if datasets.iter().any(|d| d.censor_level != level) {
            return Err(Error::domain("cannot concatenate datasets with different censor levels"));
        }
        Dataset::new(datasets.into_iter().flat_map(|d| d.records).collect(), level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(run: &str, t: f64, pl: f64) -> MeasurementRecord {
        MeasurementRecord {
            run_id: run.into(),
            t,
            d: 50.0,
            path_loss: pl,
            censored: false,
            link: LinkClass::Los,
            v_tx: 0.0,
            v_rx: 0.0,
        }
    }

    #[test]
    fn flags_follow_censor_level() {
        let ds = Dataset::new(vec![rec("a", 0.0, 100.0), rec("a", 1.0, 110.6), rec("a", 2.0, 120.0)], 110.6).unwrap();
        let flags: Vec<bool> = ds.records().iter().map(|r| r.censored).collect();
        assert_eq!(flags, [false, true, true]);
        assert_eq!(ds.n_censored(), 2);
    }

    #[test]
    fn sorted_by_run_then_time() {
        let ds = Dataset::new(vec![rec("b", 0.0, 90.0), rec("a", 5.0, 90.0), rec("a", 1.0, 90.0)], 110.0).unwrap();
        let keys: Vec<(&str, f64)> = ds.records().iter().map(|r| (r.run_id.as_str(), r.t)).collect();
        assert_eq!(keys, [("a", 1.0), ("a", 5.0), ("b", 0.0)]);
        assert_eq!(ds.run_ids(), ["a", "b"]);
        assert_eq!(ds.runs().count(), 2);
    }

    #[test]
    fn rejects_bad_distance() {
        let mut r = rec("a", 0.0, 90.0);
        r.d = 0.0;
        assert!(Dataset::new(vec![r], 110.0).is_err());
    }

    #[test]
    fn naive_view_clamps_censored_values() {
        let ds = Dataset::new(vec![rec("a", 0.0, 100.0), rec("a", 1.0, 130.0)], 110.6).unwrap();
        let naive = ds.without_censoring();
        assert_eq!(naive.n_censored(), 0);
        assert_eq!(naive.records()[1].path_loss, 110.6);
        assert_eq!(naive.records()[0].path_loss, 100.0);
    }
}
