use thiserror::Error;

/// A command failure, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid configuration.
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Numeric(String),

    /// The model document is well-formed but not a valid or stable model.
    #[error("{0}")]
    Model(String),

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Model(_) => 4,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<chainhawkes::Error> for CliError {
    fn from(e: chainhawkes::Error) -> Self {
        use chainhawkes::Error as E;
        let msg = e.to_string();
        match e {
            E::Parse(_) | E::InvalidInput(_) | E::Config(_) | E::Io(_) => CliError::Input(msg),
            E::Json(ref j) if j.classify() == serde_json::error::Category::Data => CliError::Model(msg),
            E::Json(_) => CliError::Input(msg),
            E::Unstable { .. } | E::UnsupportedKernel(_) => CliError::Model(msg),
            E::Domain(_) | E::Numeric { .. } | E::LikelihoodUndefined { .. } | E::Fit(_) | E::Truncated { .. } => {
                CliError::Numeric(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
