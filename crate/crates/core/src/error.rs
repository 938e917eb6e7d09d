use thiserror::Error;

/// Errors raised by the optimizers, the diagnostics and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A non-finite value or an impossible intermediate appeared.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The shifted objective dropped below its declared positivity floor.
    #[error("positivity violation: shifted value {value} is below the floor {floor}")]
    PositivityViolation { value: f64, floor: f64 },

    /// Invalid configuration. `line` is set when the error comes from a config file.
    #[error("{}", match .line {
        Some(line) => format!("config error (line {line}): {message}"),
        None => format!("config error: {message}"),
    })]
    Config { line: Option<usize>, message: String },

    /// Not enough usable data points to estimate a convergence rate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn config_at(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::NumericalFailure(message.into())
    }

    /// Whether this error belongs to the configuration class (exit code 2).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
