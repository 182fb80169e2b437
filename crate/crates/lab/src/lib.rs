//! File formats, parallel drivers and the `distortion-lab` command line for
//! [`distortion_core`].

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;
pub mod sweep;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] distortion_core::Error),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl LabError {
    /// Input field an invalid-input error refers to, when there is one.
    pub fn field(&self) -> Option<&'static str> {
        use distortion_core::Error as E;
        match self {
            LabError::Invalid { field, .. } => Some(field),
            LabError::Core(e) => match e {
                E::DimensionMismatch { field, .. } | E::InvalidField { field, .. } => Some(field),
                E::NegativeDistance { .. } => Some("distances"),
                E::NonIncreasingPositions { .. } => Some("positions"),
                _ => None,
            },
            _ => None,
        }
    }
}
