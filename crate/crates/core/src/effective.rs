//! Closed-form low-dimensional models: spiral cavity, avoided crossing,
//! symmetric complex two-level coupling, Hueckel chain and the Moebius 4x4.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, ModelError};
use crate::linalg::{sort_spectrum, ComplexMatrix};
use crate::sweep::{run_sweep, ModelDescriptor, SpectralSweep, SweepError, SweepParameter, SweepSpec};

/// Gap below which two closed-form eigenvalues count as coalesced.
pub const EFFECTIVE_COALESCENCE_TOL: f64 = 1e-6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn finite_c(name: &'static str, z: Complex64) -> Result<Complex64, ModelError> {
    finite(name, z.re)?;
    finite(name, z.im)?;
    Ok(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    pub e0: f64,
    pub gamma_rate: Complex64,
    pub v_mag: f64,
    pub theta: f64,
    pub eta: f64,
}

impl SpiralParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        finite("e0", self.e0)?;
        finite_c("gamma_rate", self.gamma_rate)?;
        finite("theta", self.theta)?;
        if !(self.v_mag.is_finite() && self.v_mag >= 0.0) {
            return Err(ModelError::OutOfRange {
                name: "v_mag",
                value: self.v_mag,
                expected: "finite and >= 0",
            });
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(ModelError::OutOfRange {
                name: "eta",
                value: self.eta,
                expected: "within [0, 1]",
            });
        }
        Ok(())
    }

    pub fn coupling(&self) -> Complex64 {
        Complex64::from_polar(self.v_mag, self.theta)
    }
}

/// `[[E0 + G, V], [eta V*, E0 + G]]` with `V = |V| e^{i theta}`.
pub fn spiral_matrix(p: &SpiralParams) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let diag = c(p.e0, 0.0) + p.gamma_rate;
    let v = p.coupling();
    Ok(ComplexMatrix::from_rows(&[vec![diag, v], vec![v.conj() * p.eta, diag]])?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralEigenpairs {
    /// `[E_+, E_-]`.
    pub eigenvalues: [Complex64; 2],
    /// Unit vectors paired with `eigenvalues`; a single vector when defective.
    pub eigenvectors: Vec<[Complex64; 2]>,
    pub defective: bool,
}

/// `E_+- = E0 + G +- sqrt(eta)|V|` with vectors along `(1, +-sqrt(eta) e^{-i theta})`.
pub fn spiral_eigenpairs(p: &SpiralParams) -> Result<SpiralEigenpairs, ModelError> {
    p.validate()?;
    let center = c(p.e0, 0.0) + p.gamma_rate;
    let se = p.eta.sqrt();
    let split = se * p.v_mag;
    let eigenvalues = [center + split, center - split];
    if p.v_mag == 0.0 {
        return Ok(SpiralEigenpairs {
            eigenvalues,
            eigenvectors: vec![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            defective: false,
        });
    }
    if p.eta == 0.0 {
        return Ok(SpiralEigenpairs {
            eigenvalues,
            eigenvectors: vec![[c(1.0, 0.0), c(0.0, 0.0)]],
            defective: true,
        });
    }
    let norm = (1.0 + p.eta).sqrt();
    let phase = Complex64::from_polar(se, -p.theta);
    let unit = |s: f64| [c(1.0 / norm, 0.0), phase * (s / norm)];
    Ok(SpiralEigenpairs {
        eigenvalues,
        eigenvectors: vec![unit(1.0), unit(-1.0)],
        defective: false,
    })
}

/// Hermitian two-level repulsion: `(E1 + E2)/2 +- sqrt((E1 - E2)^2 + 4|beta|^2)/2`.
pub fn avoided_crossing_levels(e1: f64, e2: f64, beta: Complex64) -> Result<(f64, f64), ModelError> {
    finite("e1", e1)?;
    finite("e2", e2)?;
    finite_c("beta", beta)?;
    let mean = (e1 + e2) / 2.0;
    let half = ((e1 - e2).powi(2) + 4.0 * beta.norm_sqr()).sqrt() / 2.0;
    Ok((mean + half, mean - half))
}

/// Two levels with symmetric complex coupling `gamma + i xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelPT {
    pub e1: f64,
    pub e2: f64,
    pub gamma_c: f64,
    pub xi: f64,
}

impl TwoLevelPT {
    pub fn validate(&self) -> Result<(), ModelError> {
        finite("e1", self.e1)?;
        finite("e2", self.e2)?;
        finite("gamma_c", self.gamma_c)?;
        finite("xi", self.xi)?;
        Ok(())
    }

    pub fn coupling(&self) -> Complex64 {
        c(self.gamma_c, self.xi)
    }
}

pub fn pt2x2_matrix(p: &TwoLevelPT) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let g = p.coupling();
    Ok(ComplexMatrix::from_rows(&[vec![c(p.e1, 0.0), g], vec![g, c(p.e2, 0.0)]])?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pt2x2Eigenvalues {
    pub lambda: [Complex64; 2],
    /// Gap below the coalescence tolerance.
    pub exceptional: bool,
}

/// `(E1 + E2)/2 +- sqrt((E1 - E2)^2/4 + (gamma + i xi)^2)`, principal root.
pub fn pt2x2_eigenvalues(p: &TwoLevelPT) -> Result<Pt2x2Eigenvalues, ModelError> {
    p.validate()?;
    let mean = c((p.e1 + p.e2) / 2.0, 0.0);
    let g = p.coupling();
    let root = (c((p.e1 - p.e2).powi(2) / 4.0, 0.0) + g * g).sqrt();
    Ok(Pt2x2Eigenvalues {
        lambda: [mean + root, mean - root],
        exceptional: 2.0 * root.norm() <= EFFECTIVE_COALESCENCE_TOL,
    })
}

/// Real detunings `E1 - E2` at which the two levels coalesce, ascending.
///
/// With zero coupling the levels touch only at zero detuning, reported as `[0]`.
pub fn pt2x2_ep_locus(gamma_c: f64, xi: f64) -> Result<Vec<f64>, ModelError> {
    finite("gamma_c", gamma_c)?;
    finite("xi", xi)?;
    Ok(match (gamma_c == 0.0, xi == 0.0) {
        (true, true) => vec![0.0],
        (true, false) => vec![-2.0 * xi.abs(), 2.0 * xi.abs()],
        _ => Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuckelChainParams {
    pub n: usize,
    pub alpha: Complex64,
    pub beta: f64,
}

impl HuckelChainParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 {
            return Err(ModelError::OutOfRange {
                name: "n",
                value: self.n as f64,
                expected: "chain length >= 2",
            });
        }
        finite_c("alpha", self.alpha)?;
        finite("beta", self.beta)?;
        Ok(())
    }
}

pub fn huckel_matrix(p: &HuckelChainParams) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let b = c(p.beta, 0.0);
    Ok(ComplexMatrix::from_fn(p.n, |i, j| match i.abs_diff(j) {
        0 => p.alpha,
        1 => b,
        _ => c(0.0, 0.0),
    }))
}

/// `alpha + 2 beta cos(j pi / (n + 1))`, `j = 1..n`, sorted.
pub fn huckel_eigenvalues(p: &HuckelChainParams) -> Result<Vec<Complex64>, ModelError> {
    p.validate()?;
    let mut v: Vec<Complex64> = (1..=p.n)
        .map(|j| p.alpha + 2.0 * p.beta * (j as f64 * PI / (p.n as f64 + 1.0)).cos())
        .collect();
    sort_spectrum(&mut v);
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moebius4x4Params {
    pub alpha: Complex64,
    pub beta: f64,
    pub xi: f64,
}

impl Moebius4x4Params {
    pub fn validate(&self) -> Result<(), ModelError> {
        finite_c("alpha", self.alpha)?;
        finite("beta", self.beta)?;
        finite("xi", self.xi)?;
        Ok(())
    }
}

/// Diagonal `(alpha, -alpha, alpha, -alpha)`, super-diagonal `beta + xi`,
/// sub-diagonal `beta - xi`.
pub fn moebius4x4_matrix(p: &Moebius4x4Params) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    Ok(ComplexMatrix::from_fn(4, |i, j| {
        if i == j {
            if i % 2 == 0 {
                p.alpha
            } else {
                -p.alpha
            }
        } else if j == i + 1 {
            c(p.beta + p.xi, 0.0)
        } else if i == j + 1 {
            c(p.beta - p.xi, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// `+- sqrt(alpha^2 + (beta^2 - xi^2) e_j^2)` with `e_j = 2 cos(j pi / 5)`, sorted.
///
/// The alternating diagonal anticommutes with the path adjacency, so the
/// square of the matrix is diagonal in the chain's normal modes.
pub fn moebius4x4_eigenvalues(p: &Moebius4x4Params) -> Result<Vec<Complex64>, ModelError> {
    p.validate()?;
    let s2 = p.beta * p.beta - p.xi * p.xi;
    let mut v = Vec::with_capacity(4);
    for j in 1..=2 {
        let e = 2.0 * (j as f64 * PI / 5.0).cos();
        let r = (p.alpha * p.alpha + s2 * e * e).sqrt();
        v.push(r);
        v.push(-r);
    }
    sort_spectrum(&mut v);
    Ok(v)
}

/// Branch-tracked spectrum of the 4x4 over real `alpha` in `alpha_range`,
/// with `alpha_im` added to the imaginary part of `alpha` throughout.
pub fn moebius4x4_spectrum_sweep(
    beta: f64,
    xi: f64,
    alpha_im: f64,
    alpha_range: (f64, f64),
    steps: usize,
) -> Result<SpectralSweep, SweepError> {
    let params = Moebius4x4Params {
        alpha: c(0.0, alpha_im),
        beta,
        xi,
    };
    params.validate()?;
    run_sweep(&SweepSpec {
        parameter: SweepParameter::Alpha,
        start: alpha_range.0,
        end: alpha_range.1,
        steps,
        base: ModelDescriptor::Moebius4x4 { params },
    })
}

/// `D M D^-1` with `D = diag(1, r)`, `r^2 = M12 / M21`; the result is
/// symmetric with off-diagonals `sqrt(M12 M21)`.
pub fn similarity_symmetrize(m: &ComplexMatrix) -> Result<ComplexMatrix, ModelError> {
    if m.dim() != 2 {
        return Err(ModelError::NotTwoByTwo(m.dim()));
    }
    m.check_finite()?;
    let (m12, m21) = (m[(0, 1)], m[(1, 0)]);
    if m12 == c(0.0, 0.0) {
        return Err(ModelError::ZeroOffDiagonal { row: 0, col: 1 });
    }
    if m21 == c(0.0, 0.0) {
        return Err(ModelError::ZeroOffDiagonal { row: 1, col: 0 });
    }
    if m12 == m21 {
        return Ok(m.clone());
    }
    let r = (m12 / m21).sqrt();
    let mut out = m.clone();
    out[(0, 1)] = m12 / r;
    out[(1, 0)] = m21 * r;
    Ok(out)
}
