use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Reject, Result};
use crate::fusion::{GpsFix, RawCampaign, RfSample, UwbRange};
use crate::io::processed::PATH_LOSS_SANITY;

pub const GPS_HEADER: [&str; 3] = ["t", "lat", "lon"];
pub const UWB_HEADER: [&str; 2] = ["t", "range_m"];
pub const RF_HEADER: [&str; 2] = ["t", "path_loss_db"];

/// Reads a headed CSV of numeric columns. Rows must have strictly
/// increasing first column (time); `check` validates the parsed row.
fn read_numeric<R: Read, T>(
    input: R,
    header: &[&str],
    check: impl Fn(&[f64]) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows = reader.records();
    let names: Vec<String> = match rows.next() {
        Some(h) => h?.iter().map(|s| s.trim().to_string()).collect(),
        None => Vec::new(),
    };
    if names != header {
        return Err(Error::Validation(vec![Reject {
            line: 1,
            message: format!("expected header {}, got {}", header.join(","), names.join(",")),
        }]));
    }
    let mut out = Vec::new();
    let mut rejects = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, String> = if row.len() != header.len() {
            Err(format!("expected {} fields, got {}", header.len(), row.len()))
        } else {
            row.iter()
                .zip(header)
                .map(|(f, name)| f.trim().parse::<f64>().map_err(|_| format!("{name}: cannot parse {f:?}")))
                .collect()
        };
        let result = parsed.and_then(|v| {
            if !v[0].is_finite() {
                return Err("t must be finite".into());
            }
            if v[0] <= last_t {
                return Err(format!("t {} does not increase (previous {last_t})", v[0]));
            }
            let item = check(&v)?;
            last_t = v[0];
            Ok(item)
        });
        match result {
            Ok(item) => out.push(item),
            Err(message) => rejects.push(Reject { line, message }),
        }
    }
    if rejects.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(rejects))
    }
}

pub fn read_gps<R: Read>(input: R) -> Result<Vec<GpsFix>> {
    read_numeric(input, &GPS_HEADER, |v| {
        if !(v[1].abs() <= 90.0 && v[2].abs() <= 360.0) {
            return Err(format!("coordinate ({}, {}) out of range", v[1], v[2]));
        }
        Ok(GpsFix { t: v[0], lat: v[1], lon: v[2] })
    })
}

pub fn read_uwb<R: Read>(input: R) -> Result<Vec<UwbRange>> {
    read_numeric(input, &UWB_HEADER, |v| {
        if !v[1].is_finite() {
            return Err("range_m must be finite".into());
        }
        Ok(UwbRange { t: v[0], range: v[1] })
    })
}

pub fn read_rf<R: Read>(input: R) -> Result<Vec<RfSample>> {
    read_numeric(input, &RF_HEADER, |v| {
        if !(PATH_LOSS_SANITY.0..=PATH_LOSS_SANITY.1).contains(&v[1]) {
            return Err(format!("path_loss_db {} outside [{}, {}] dB", v[1], PATH_LOSS_SANITY.0, PATH_LOSS_SANITY.1));
        }
        Ok(RfSample { t: v[0], path_loss: v[1] })
    })
}

fn write_numeric<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gps<W: Write>(fixes: &[GpsFix], out: W) -> Result<()> {
    write_numeric(out, &GPS_HEADER, fixes.iter().map(|f| vec![f.t, f.lat, f.lon]))
}

pub fn write_uwb<W: Write>(ranges: &[UwbRange], out: W) -> Result<()> {
    write_numeric(out, &UWB_HEADER, ranges.iter().map(|u| vec![u.t, u.range]))
}

pub fn write_rf<W: Write>(samples: &[RfSample], out: W) -> Result<()> {
    write_numeric(out, &RF_HEADER, samples.iter().map(|s| vec![s.t, s.path_loss]))
}

/// Locations of the four raw sensor files of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPaths {
    pub gps_tx: PathBuf,
    pub gps_rx: PathBuf,
    pub uwb: PathBuf,
    pub rf: PathBuf,
}

impl RawPaths {
    /// `gps_tx.csv`, `gps_rx.csv`, `uwb.csv` and `rf.csv` inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            gps_tx: dir.join("gps_tx.csv"),
            gps_rx: dir.join("gps_rx.csv"),
            uwb: dir.join("uwb.csv"),
            rf: dir.join("rf.csv"),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [&self.gps_tx, &self.gps_rx, &self.uwb, &self.rf]
    }
}

/// Sensor error settings attached to ingested raw streams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorErrors {
    pub uwb_cable_bias: f64,
    pub gps_sigma: f64,
    pub uwb_sigma: f64,
}

impl Default for SensorErrors {
    fn default() -> Self {
        Self {
            uwb_cable_bias: crate::fusion::DEFAULT_UWB_BIAS,
            gps_sigma: crate::fusion::DEFAULT_GPS_SIGMA,
            uwb_sigma: crate::fusion::DEFAULT_UWB_SIGMA,
        }
    }
}

fn with_file<T>(path: &Path, read: impl FnOnce(File) -> Result<T>) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read(file).map_err(|e| match e {
        Error::Validation(rejects) => Error::Validation(
            rejects
                .into_iter()
                .map(|r| Reject { line: r.line, message: format!("{}: {}", path.display(), r.message) })
                .collect(),
        ),
        other => other,
    })
}

/// Reads and validates the four raw streams of one run.
pub fn ingest_raw(paths: &RawPaths, errors: SensorErrors) -> Result<RawCampaign> {
    let raw = RawCampaign {
        gps_tx: with_file(&paths.gps_tx, read_gps)?,
        gps_rx: with_file(&paths.gps_rx, read_gps)?,
        uwb: with_file(&paths.uwb, read_uwb)?,
        rf_samples: with_file(&paths.rf, read_rf)?,
        uwb_cable_bias: errors.uwb_cable_bias,
        gps_sigma: errors.gps_sigma,
        uwb_sigma: errors.uwb_sigma,
    };
    raw.validate()?;
    Ok(raw)
}

/// Writes the four raw streams into `dir`, creating it if needed.
pub fn write_raw(raw: &RawCampaign, dir: impl AsRef<Path>) -> Result<RawPaths> {
    std::fs::create_dir_all(dir.as_ref())?;
    let paths = RawPaths::in_dir(dir);
    write_gps(&raw.gps_tx, File::create(&paths.gps_tx)?)?;
    write_gps(&raw.gps_rx, File::create(&paths.gps_rx)?)?;
    write_uwb(&raw.uwb, File::create(&paths.uwb)?)?;
    write_rf(&raw.rf_samples, File::create(&paths.rf)?)?;
    Ok(paths)
}
