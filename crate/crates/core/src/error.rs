use thiserror::Error;

use crate::pathloss::LinkClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("model conditions on link class but a sample is labelled UNKNOWN")]
    LinkClassRequired,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("not enough uncensored {0} samples for a per-class fit")]
    InsufficientClassData(LinkClass),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("query time {t} s outside the available span [{start}, {end}] s")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("{}", format_rejects(.0))]
    Validation(Vec<Reject>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input data or arguments rather than IO.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

/// One rejected input row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Reject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn format_rejects(rejects: &[Reject]) -> String {
    let mut out = format!("{} invalid row(s)", rejects.len());
    for r in rejects.iter().take(20) {
        out.push_str("\n  ");
        out.push_str(&r.to_string());
    }
    if rejects.len() > 20 {
        out.push_str(&format!("\n  ... and {} more", rejects.len() - 20));
    }
    out
}
