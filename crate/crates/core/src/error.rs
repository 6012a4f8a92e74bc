use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("RRC span of {span} symbols is too short (at least {min} required)")]
    SpanTooShort { span: usize, min: usize },

    #[error("occupied bandwidth {band_hz:.4e} Hz exceeds the sample rate {sample_rate:.4e} Hz")]
    BandExceedsSampling { band_hz: f64, sample_rate: f64 },

    #[error("MZM drive peak {peak} exceeds 1")]
    DriveOutOfRange { peak: f64 },

    #[error("degenerate reservoir draw: {0}")]
    DegenerateReservoir(String),

    #[error("spectral radius iteration did not converge after {iterations} iterations")]
    PowerIterationDiverged { iterations: usize },

    #[error("normal matrix of readout row {row} is singular; use ridge_lambda > 0")]
    SingularNormalMatrix { row: usize },

    #[error("readout mask row {row} selects no reservoir predictors")]
    EmptyMaskRow { row: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("BER curve never crosses the threshold {threshold:e}")]
    NotBracketed { threshold: f64 },

    #[error("BER curve has no decreasing segment through the threshold {threshold:e}")]
    NonMonotone { threshold: f64 },

    #[error("cannot parse {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("cannot parse weights artifact: {0}")]
    ArtifactParse(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::ConfigParse { .. }
                | Error::SpanTooShort { .. }
                | Error::BandExceedsSampling { .. }
        )
    }
}
