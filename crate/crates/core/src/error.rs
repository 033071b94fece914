use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("singular source: {0}")]
    SingularSource(String),

    #[error("root solver failed: {0}")]
    SolverFailure(String),

    #[error("infeasible calibration: {0}")]
    InfeasibleCalibration(String),

    #[error("evaluation failed at theta={theta:.6} rad, phi={phi:.6} rad: {source}")]
    GridPoint {
        theta: f64,
        phi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
