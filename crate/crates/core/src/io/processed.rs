use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::censored::{Dataset, MeasurementRecord};
use crate::error::{Error, Reject, Result};
use crate::fusion::DistanceSource;
use crate::pathloss::LinkClass;

/// Mandatory columns of a processed campaign file, in order.
pub const PROCESSED_HEADER: [&str; 8] =
    ["run_id", "t_s", "d_m", "path_loss_db", "censored", "link", "v_tx_mps", "v_rx_mps"];
/// Optional trailing column written by the fusion pipeline.
pub const SOURCE_COLUMN: &str = "d_source";

/// Plausible path-loss range, dB. Values outside it are unit errors.
pub const PATH_LOSS_SANITY: (f64, f64) = (20.0, 200.0);

/// Result of reading a processed campaign: the accepted rows and one
/// diagnostic per rejected row.
#[derive(Debug)]
pub struct Ingested {
    pub dataset: Dataset,
    pub rejects: Vec<Reject>,
}

impl Ingested {
    /// The dataset, or every diagnostic if any row was rejected.
    pub fn strict(self) -> Result<Dataset> {
        if self.rejects.is_empty() {
            Ok(self.dataset)
        } else {
            Err(Error::Validation(self.rejects))
        }
    }
}

fn number(field: &str, name: &str) -> std::result::Result<f64, String> {
    field.trim().parse::<f64>().map_err(|_| format!("{name}: cannot parse {field:?} as a number"))
}

fn parse_row(fields: &csv::StringRecord, censor_level: f64) -> std::result::Result<MeasurementRecord, String> {
    let run_id = fields[0].to_string();
    if run_id.is_empty() {
        return Err("run_id is empty".into());
    }
    let t = number(&fields[1], "t_s")?;
    let d = number(&fields[2], "d_m")?;
    let path_loss = number(&fields[3], "path_loss_db")?;
    let link: LinkClass = fields[5].trim().parse().map_err(|e: Error| e.to_string())?;
    let v_tx = number(&fields[6], "v_tx_mps")?;
    let v_rx = number(&fields[7], "v_rx_mps")?;
    if fields.len() > 8 {
        fields[8].trim().parse::<DistanceSource>().map_err(|e| e.to_string())?;
    }
    if !t.is_finite() {
        return Err(format!("t_s must be finite, got {t}"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(format!("d_m must be > 0, got {d}"));
    }
    if !(PATH_LOSS_SANITY.0..=PATH_LOSS_SANITY.1).contains(&path_loss) {
        return Err(format!(
            "path_loss_db {path_loss} outside [{}, {}] dB",
            PATH_LOSS_SANITY.0, PATH_LOSS_SANITY.1
        ));
    }
    if !(v_tx.is_finite() && v_rx.is_finite()) {
        return Err("speeds must be finite".into());
    }
    let derived = path_loss >= censor_level;
    let censored = match fields[4].trim() {
        "" => derived,
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(format!("censored: expected true/false, got {other:?}")),
    };
    if censored != derived {
        return Err(format!("censored={censored} disagrees with censor level {censor_level} dB at {path_loss} dB"));
    }
    Ok(MeasurementRecord { run_id, t, d, path_loss, censored, link, v_tx, v_rx })
}

/// Reads a processed campaign CSV. Malformed rows, non-positive distances,
/// implausible path loss, timestamps that do not increase within a run and
/// censoring flags that contradict `censor_level` are rejected with their
/// line numbers; an empty `censored` field is derived from `censor_level`.
pub fn read_processed<R: Read>(input: R, censor_level: f64) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => return Err(Error::Validation(vec![Reject { line: 1, message: "missing header row".into() }])),
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let with_source = names.len() == 9 && names[8] == SOURCE_COLUMN;
    if names[..names.len().min(8)] != PROCESSED_HEADER[..] || !(names.len() == 8 || with_source) {
        return Err(Error::Validation(vec![Reject {
            line: 1,
            message: format!("expected header {}[,{SOURCE_COLUMN}], got {}", PROCESSED_HEADER.join(","), names.join(",")),
        }]));
    }
    let width = names.len();

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut last_t: HashMap<String, f64> = HashMap::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != width {
            rejects.push(Reject { line, message: format!("expected {width} fields, got {}", row.len()) });
            continue;
        }
        match parse_row(&row, censor_level) {
            Ok(r) => {
                if let Some(&prev) = last_t.get(&r.run_id) {
                    if r.t <= prev {
                        rejects.push(Reject {
                            line,
                            message: format!("t_s {} does not increase within run {} (previous {prev})", r.t, r.run_id),
                        });
                        continue;
                    }
                }
                last_t.insert(r.run_id.clone(), r.t);
                records.push(r);
            }
            Err(message) => rejects.push(Reject { line, message }),
        }
    }
    Ok(Ingested { dataset: Dataset::new(records, censor_level)?, rejects })
}

pub fn ingest_processed(path: impl AsRef<Path>, censor_level: f64) -> Result<Ingested> {
    read_processed(File::open(path)?, censor_level)
}

/// Writes a dataset in the processed campaign schema. Numbers use the
/// shortest representation that parses back to the same value.
pub fn write_processed<W: Write>(data: &Dataset, out: W) -> Result<()> {
    write_rows(data, None, out)
}

/// As [`write_processed`] with a trailing `d_source` column, one entry per
/// record in dataset order.
pub fn write_processed_with_sources<W: Write>(data: &Dataset, sources: &[DistanceSource], out: W) -> Result<()> {
    if sources.len() != data.len() {
        return Err(Error::domain(format!("{} sources for {} records", sources.len(), data.len())));
    }
    write_rows(data, Some(sources), out)
}

fn write_rows<W: Write>(data: &Dataset, sources: Option<&[DistanceSource]>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = PROCESSED_HEADER.to_vec();
    if sources.is_some() {
        header.push(SOURCE_COLUMN);
    }
    w.write_record(&header)?;
    for (i, r) in data.records().iter().enumerate() {
        let mut row = vec![
            r.run_id.clone(),
            r.t.to_string(),
            r.d.to_string(),
            r.path_loss.to_string(),
            r.censored.to_string(),
            r.link.as_str().to_string(),
            r.v_tx.to_string(),
            r.v_rx.to_string(),
        ];
        if let Some(s) = sources {
            row.push(s[i].as_str().to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
