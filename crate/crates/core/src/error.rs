use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("instance too large: {0}")]
    Capacity(String),

    /// A scenario or config file failed validation; `field` is the dotted path of the offending key.
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// A sweep point failed; carries the point that produced the error.
    #[error("sweep point (speed {speed_mps} m/s, seed {seed}) failed: {source}")]
    SweepPoint {
        speed_mps: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
