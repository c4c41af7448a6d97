//! Dense complex linear algebra: matrices, Hessenberg reduction, a shifted
//! QR eigenvalue solver and inverse-iteration eigenvectors.

mod eigen;
mod hessenberg;
mod matrix;
mod qr;

use num_complex::Complex64;
use thiserror::Error;

pub use eigen::{eigen_full, eigen_full_with, EigenDecomposition};
pub use hessenberg::{hessenberg_reduce, Hessenberg};
pub use matrix::{inner, vec_norm, ComplexMatrix};
pub use qr::eigenvalues_qr;

/// Default relative tolerance of the residual contract.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default QR sweep budget per unit of matrix dimension.
pub const ITERATIONS_PER_DIM: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has no rows")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("QR iteration stopped after {iterations} sweeps with {active} eigenvalues undeflated")]
    NotConverged { iterations: usize, active: usize },
    #[error("inverse iteration failed for eigenvalue {index} (best residual {residual:e})")]
    InverseIteration { index: usize, residual: f64 },
    #[error("need at least two values, got {0}")]
    TooFewValues(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Total QR sweep budget; `None` means `40 * n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

impl SolverOptions {
    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(ITERATIONS_PER_DIM * n.max(1))
    }
}

/// Eigenvalues with the default tolerance and iteration budget.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let opts = SolverOptions::default();
    eigenvalues_qr(m, opts.tol, opts.max_iter_for(m.dim()))
}

/// Sorts by real part, then imaginary part.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGap {
    pub gap: f64,
    pub pair: (usize, usize),
}

/// Smallest `|v_i - v_j|` over `i < j`; ties go to the lexicographically
/// lowest pair.
pub fn smallest_pairwise_gap(values: &[Complex64]) -> Result<PairGap, LinalgError> {
    if values.len() < 2 {
        return Err(LinalgError::TooFewValues(values.len()));
    }
    let mut best = PairGap {
        gap: f64::INFINITY,
        pair: (0, 1),
    };
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let g = (values[i] - values[j]).norm();
            if g < best.gap {
                best = PairGap { gap: g, pair: (i, j) };
            }
        }
    }
    Ok(best)
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> Complex64 {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
            .expect("non-empty range");
        if a[p * n + k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let l = a[i * n + k] / pivot;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= l * t;
            }
        }
    }
    det
}

/// Largest distance between paired elements when each value of `a` is
/// matched greedily to its nearest unused partner in `b`.
///
/// Returns infinity on length mismatch.
pub fn multiset_max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Deviation of a spectrum from closure under complex conjugation.
pub fn conjugation_defect(values: &[Complex64]) -> f64 {
    let conj: Vec<Complex64> = values.iter().map(|z| z.conj()).collect();
    multiset_max_deviation(values, &conj)
}
