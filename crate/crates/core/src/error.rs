use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("element matrix is singular at zero wavenumber")]
    ZeroWavenumber,

    #[error("scattering system at {frequency_hz} Hz is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { frequency_hz: f64, condition: f64 },

    #[error("carrier offset f_c*u*n/f_s = {0} is not an integer bin")]
    FractionalCarrier(f64),

    #[error("zero channel gain on active subcarrier {0}")]
    ZeroGain(usize),

    #[error("training diverged (non-finite loss) at epoch {epoch}, step {step}")]
    Divergence { epoch: usize, step: usize },

    #[error("model does not match config: {0}")]
    ModelMismatch(String),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
