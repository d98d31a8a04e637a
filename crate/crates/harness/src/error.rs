use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Invalid or unusable configuration; `path` is the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    /// Training or an oracle hit a numerical failure.
    #[error("numeric fault: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed run log.
    #[error("{path}:{line}: {message}")]
    Log { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(agm_core::Error),
}

impl HarnessError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        HarnessError::Config { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    /// Process exit code: 2 for configuration problems, 3 for numeric
    /// faults, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Numeric(_) => 3,
            HarnessError::Core(e) => match e {
                agm_core::Error::Numeric(_) | agm_core::Error::NoConvergence { .. } => 3,
                agm_core::Error::Format(_) => 1,
                _ => 2,
            },
            HarnessError::Io { .. } | HarnessError::Log { .. } => 1,
        }
    }
}

impl From<agm_core::Error> for HarnessError {
    fn from(e: agm_core::Error) -> Self {
        match e {
            agm_core::Error::Numeric(m) => HarnessError::Numeric(m),
            e => HarnessError::Core(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
