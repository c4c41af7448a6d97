//! Spectral simulation of non-Hermitian circular and Moebius ladder lattices.

pub mod effective;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod sweep;

pub use error::ModelError;
pub use num_complex::Complex64;
