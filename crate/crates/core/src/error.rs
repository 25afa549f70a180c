use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The decoy intensities leave an estimator denominator non-positive.
    #[error("degenerate intensities: {0}")]
    DegenerateIntensities(String),

    /// The estimators cannot produce a key (empty basis, zero single-photon yield).
    #[error("no key can be extracted: {0}")]
    NoKey(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no time slot survives the window selection")]
    EmptyWindow,

    #[error("could not draw feasible initial parameters after {0} attempts")]
    InfeasibleBounds(usize),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: row {row}: {field} = {value} violates {rule}")]
    RowInvariant {
        path: PathBuf,
        row: usize,
        field: &'static str,
        value: f64,
        rule: &'static str,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}
