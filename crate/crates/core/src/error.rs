use thiserror::Error;

use crate::hawkes::EventSequence;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("numerical failure: {message} ({diagnostics})")]
    Numeric { message: String, diagnostics: String },

    #[error("log-likelihood undefined: intensity {intensity:e} at event {event_index}")]
    LikelihoodUndefined { event_index: usize, intensity: f64 },

    #[error("model is not stable: kernel-norm spectral radius {spectral_radius:.6} >= 1")]
    Unstable { spectral_radius: f64 },

    #[error("simulation stopped after {max_events} events at t = {stopped_at:.6}")]
    Truncated {
        max_events: usize,
        stopped_at: f64,
        partial: Box<EventSequence>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}", format_rows(.0))]
    Parse(Vec<RowError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A rejected input row. `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn format_rows(rows: &[RowError]) -> String {
    let mut out = format!("{} malformed row(s)", rows.len());
    for row in rows.iter().take(10) {
        out.push_str("\n  ");
        out.push_str(&row.to_string());
    }
    out
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse_row(line: usize, message: impl Into<String>) -> Self {
        Error::Parse(vec![RowError {
            line,
            message: message.into(),
        }])
    }
}
