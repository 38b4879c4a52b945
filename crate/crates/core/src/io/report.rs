use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// What produced a report and from which inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    /// File name without directories, so reports are stable across machines.
    pub file: String,
    pub sha256: String,
}

impl Provenance {
    pub fn new(seed: u64, inputs: &[&Path]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    file: p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { tool: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into(), seed, inputs })
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

/// A command result plus its provenance block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: T,
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "abc").unwrap();
        let prov = Provenance::new(3, &[&p]).unwrap();
        assert_eq!(prov.inputs[0].file, "x.csv");
        assert_eq!(prov.inputs[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(prov.seed, 3);
    }

    #[test]
    fn flattened_report() {
        #[derive(Serialize)]
        struct Body {
            value: u8,
        }
        let r = Report { provenance: Provenance { tool: "t".into(), version: "0".into(), seed: 1, inputs: vec![] }, body: Body { value: 4 } };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"value\":4") && text.contains("\"provenance\""));
    }
}
