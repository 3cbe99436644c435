use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambiguous-zones: zones {0} and {1} overlap")]
    AmbiguousZones(String, String),

    #[error("empty-selector: no access point matches {0}")]
    EmptySelector(String),

    #[error("non-positive-distance: {0} m")]
    NonPositiveDistance(f64),

    #[error("degenerate-geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("no-coverage: every access point is at the RSSI floor")]
    NoCoverage,

    #[error("unrangeable: RSSI {0} dBm is at or below the floor")]
    Unrangeable(f64),

    #[error("underdetermined: need at least 3 range observations, got {0}")]
    Underdetermined(usize),

    #[error("diverged: solver produced a non-finite iterate")]
    Diverged,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("width mismatch: expected {expected} features, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dataset too small: {0}")]
    DatasetTooSmall(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
