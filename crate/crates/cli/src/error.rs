use ladder_core::linalg::LinalgError;
use ladder_core::sweep::SweepError;
use ladder_core::ModelError;
use thiserror::Error;

/// A failure reported as `error[<code>] <message>` on one line.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or parameters; exit code 2.
    #[error("{message}")]
    Invalid { code: &'static str, message: String },
    /// The numerics could not deliver; exit code 3.
    #[error("{message}")]
    Numerical { code: &'static str, message: String },
}

impl CliError {
    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::Invalid {
            code,
            message: message.into(),
        }
    }

    pub fn numerical(code: &'static str, message: impl Into<String>) -> Self {
        Self::Numerical {
            code,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Invalid { code, .. } | Self::Numerical { code, .. } => code,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid { .. } => 2,
            Self::Numerical { .. } => 3,
        }
    }

    /// The single line written to stderr.
    pub fn line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}] {message}", self.code())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Empty
            | LinalgError::NotSquare { .. }
            | LinalgError::NonFinite { .. }
            | LinalgError::InvalidTolerance(_)
            | LinalgError::TooFewValues(_) => Self::invalid("invalid-parameter", e.to_string()),
            LinalgError::NotConverged { .. } | LinalgError::InverseIteration { .. } => {
                Self::numerical("solver-failure", e.to_string())
            }
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Linalg(inner) => inner.into(),
            ModelError::ClosedFormUnavailable { .. } => Self::invalid("closed-form-unavailable", e.to_string()),
            _ => Self::invalid("invalid-parameter", e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Model(inner) => inner.into(),
            SweepError::InvalidSpec(_) => Self::invalid("invalid-sweep", e.to_string()),
            SweepError::TooFewSizes(_) => Self::invalid("invalid-parameter", e.to_string()),
            SweepError::Solver { .. } => Self::numerical("solver-failure", e.to_string()),
            SweepError::WrongRegime { .. } => Self::numerical("wrong-regime", e.to_string()),
            SweepError::NoFeature { .. } => Self::numerical("no-feature", e.to_string()),
            SweepError::NonPositiveGap { .. } => Self::numerical("nonpositive-gap", e.to_string()),
        }
    }
}
