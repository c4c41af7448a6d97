use thiserror::Error;

use crate::linalg::LinalgError;

/// Invalid model parameters or a closed form used outside its domain.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("N must be at least 3 unit cells, got {0}")]
    TooFewCells(usize),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} out of range: {value} ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("closed-form Moebius spectrum needs delta = gamma = 0 (got delta = {delta}, gamma = {gamma}); diagonalize the Hamiltonian instead")]
    ClosedFormUnavailable { delta: f64, gamma: f64 },
    #[error("vector length {0} is not an even number of ladder sites")]
    OddDimension(usize),
    #[error("zero vector cannot be classified")]
    ZeroVector,
    #[error("intra-cell hopping d = 0 leaves the Bloch eigenvector undefined in this gauge")]
    ZeroIntraHopping,
    #[error("expected a 2x2 matrix, got {0}x{0}")]
    NotTwoByTwo(usize),
    #[error("similarity transform undefined: off-diagonal entry ({row}, {col}) is zero")]
    ZeroOffDiagonal { row: usize, col: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}
