//! Campaign files: the processed per-sample CSV, raw sensor CSVs,
//! fast-fading pre-averaging, JSON configuration and report provenance.

mod config;
mod preaverage;
mod processed;
mod raw;
mod report;

pub use config::{parse_bins, parse_sweep, CampaignConfig, ShadowingConfig, SynthConfig};
pub use preaverage::{preaverage_path_loss, preaverage_power};
pub use processed::{
    ingest_processed, read_processed, write_processed, write_processed_with_sources, Ingested, PATH_LOSS_SANITY,
    PROCESSED_HEADER, SOURCE_COLUMN,
};
pub use raw::{
    ingest_raw, read_gps, read_rf, read_uwb, write_gps, write_raw, write_rf, write_uwb, RawPaths, SensorErrors,
};
pub use report::{sha256_file, write_json, InputDigest, Provenance, Report};
