//! Circular and Moebius ladder lattices: real-space Hamiltonians, Bloch
//! bands, closed-form spectra and rung parity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, ModelError};
use crate::linalg::{inner, sort_spectrum, vec_norm, ComplexMatrix, EigenDecomposition};

/// Default tolerance for `Even`/`Odd` parity labels.
pub const PARITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTopology {
    Circular,
    Moebius,
}

/// Unit-cell parameters of a ladder with `n` rungs.
///
/// On-site energies are antisymmetric: `eps_a = -eps_b = (delta + i gamma) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    pub n: usize,
    pub d: f64,
    pub t: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl LadderParams {
    pub fn new(n: usize, d: f64, t: f64, delta: f64, gamma: f64) -> Result<Self, ModelError> {
        let p = Self {
            n,
            d,
            t,
            delta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 3 {
            return Err(ModelError::TooFewCells(self.n));
        }
        finite("d", self.d)?;
        finite("t", self.t)?;
        finite("delta", self.delta)?;
        finite("gamma", self.gamma)?;
        Ok(())
    }

    pub fn eps_a(&self) -> Complex64 {
        Complex64::new(self.delta, self.gamma) / 2.0
    }

    pub fn eps_b(&self) -> Complex64 {
        -self.eps_a()
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// Width of the real band support at zero detuning, `4|t| + 2|d|`.
    pub fn bandwidth(&self) -> f64 {
        4.0 * self.t.abs() + 2.0 * self.d.abs()
    }
}

/// Real-space `2N x 2N` Hamiltonian with site order `a_1, b_1, ..., a_N, b_N`.
pub fn build_hamiltonian(p: &LadderParams, topo: BoundaryTopology) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let n = p.n;
    let mut h = ComplexMatrix::zeros(2 * n);
    let (ea, eb) = (p.eps_a(), p.eps_b());
    let md = Complex64::new(-p.d, 0.0);
    let mt = Complex64::new(-p.t, 0.0);
    let a = |cell: usize| 2 * cell;
    let b = |cell: usize| 2 * cell + 1;
    let link = |h: &mut ComplexMatrix, i: usize, j: usize, v: Complex64| {
        h[(i, j)] += v;
        h[(j, i)] += v;
    };
    for c in 0..n {
        h[(a(c), a(c))] = ea;
        h[(b(c), b(c))] = eb;
        link(&mut h, a(c), b(c), md);
    }
    for c in 0..n - 1 {
        link(&mut h, a(c), a(c + 1), mt);
        link(&mut h, b(c), b(c + 1), mt);
    }
    let last = n - 1;
    match topo {
        BoundaryTopology::Circular => {
            link(&mut h, a(last), a(0), mt);
            link(&mut h, b(last), b(0), mt);
        }
        BoundaryTopology::Moebius => {
            link(&mut h, a(last), b(0), mt);
            link(&mut h, b(last), a(0), mt);
        }
    }
    Ok(h)
}

/// `2 x 2` Bloch Hamiltonian at wave vector `k`.
pub fn bloch_matrix(k: f64, p: &LadderParams) -> Result<ComplexMatrix, ModelError> {
    finite("k", k)?;
    let band = Complex64::new(-2.0 * p.t * k.cos(), 0.0);
    let md = Complex64::new(-p.d, 0.0);
    Ok(ComplexMatrix::from_rows(&[
        vec![p.eps_a() + band, md],
        vec![md, p.eps_b() + band],
    ])?)
}

fn band_root(p: &LadderParams) -> Complex64 {
    let e = p.eps_a();
    (Complex64::new(p.d * p.d, 0.0) + e * e).sqrt()
}

/// Band energies `E_+, E_-` at `k` (principal square root).
pub fn bloch_eigenvalues(k: f64, p: &LadderParams) -> Result<(Complex64, Complex64), ModelError> {
    finite("k", k)?;
    finite("d", p.d)?;
    finite("t", p.t)?;
    finite("delta", p.delta)?;
    finite("gamma", p.gamma)?;
    let base = Complex64::new(-2.0 * p.t * k.cos(), 0.0);
    let r = band_root(p);
    Ok((base + r, base - r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochBandPoint {
    pub k: f64,
    pub e_plus: Complex64,
    pub e_minus: Complex64,
}

impl BlochBandPoint {
    pub fn at(k: f64, p: &LadderParams) -> Result<Self, ModelError> {
        let (e_plus, e_minus) = bloch_eigenvalues(k, p)?;
        Ok(Self { k, e_plus, e_minus })
    }
}

/// Band points on `resolution` equally spaced `k` in `[0, 2 pi)`.
pub fn bloch_bands(p: &LadderParams, resolution: usize) -> Result<Vec<BlochBandPoint>, ModelError> {
    if resolution < 2 {
        return Err(ModelError::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            expected: "at least 2 k points",
        });
    }
    (0..resolution)
        .map(|i| BlochBandPoint::at(2.0 * PI * i as f64 / resolution as f64, p))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    /// Unnormalized, second component fixed to 1.
    pub raw: [Complex64; 2],
    pub normalized: [Complex64; 2],
    pub energy: Complex64,
    /// Radicand vanishes: both branches share this single vector.
    pub exceptional: bool,
}

/// Bloch eigenvector `(-(eps +- r)/d, 1)` with `r = sqrt(d^2 + eps^2)`.
pub fn bloch_eigenvector(k: f64, p: &LadderParams, branch: Branch) -> Result<BlochVector, ModelError> {
    let (ep, em) = bloch_eigenvalues(k, p)?;
    if p.d == 0.0 {
        return Err(ModelError::ZeroIntraHopping);
    }
    let eps = p.eps_a();
    let r = band_root(p);
    let scale = p.d.abs().max(eps.norm());
    let exceptional = r.norm() <= f64::EPSILON * scale;
    let (root, energy) = match branch {
        _ if exceptional => (Complex64::new(0.0, 0.0), ep),
        Branch::Plus => (r, ep),
        Branch::Minus => (-r, em),
    };
    let x = -(eps + root) / p.d;
    let one = Complex64::new(1.0, 0.0);
    let norm = (x.norm_sqr() + 1.0).sqrt();
    Ok(BlochVector {
        raw: [x, one],
        normalized: [x / norm, one / norm],
        energy,
        exceptional,
    })
}

/// Circular-ladder spectrum: both bands at `k_n = 2 n pi / N`, sorted.
pub fn analytic_cll_spectrum(p: &LadderParams) -> Result<Vec<Complex64>, ModelError> {
    p.validate()?;
    let mut out = Vec::with_capacity(2 * p.n);
    for m in 1..=p.n {
        let (ep, em) = bloch_eigenvalues(2.0 * PI * m as f64 / p.n as f64, p)?;
        out.push(ep);
        out.push(em);
    }
    sort_spectrum(&mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusSpectrum {
    /// `-2t cos(2 n pi / N) - d`, sorted.
    pub even: Vec<f64>,
    /// `-2t cos((2n - 1) pi / N) + d`, sorted.
    pub odd: Vec<f64>,
}

impl MoebiusSpectrum {
    pub fn all(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self
            .even
            .iter()
            .chain(&self.odd)
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        sort_spectrum(&mut v);
        v
    }
}

/// Closed-form Moebius spectrum; only defined at `delta = gamma = 0`.
pub fn analytic_mll_spectrum(p: &LadderParams) -> Result<MoebiusSpectrum, ModelError> {
    p.validate()?;
    if p.delta != 0.0 || p.gamma != 0.0 {
        return Err(ModelError::ClosedFormUnavailable {
            delta: p.delta,
            gamma: p.gamma,
        });
    }
    let nf = p.n as f64;
    let mut even: Vec<f64> = (1..=p.n)
        .map(|m| -2.0 * p.t * (2.0 * m as f64 * PI / nf).cos() - p.d)
        .collect();
    let mut odd: Vec<f64> = (1..=p.n)
        .map(|m| -2.0 * p.t * ((2.0 * m as f64 - 1.0) * PI / nf).cos() + p.d)
        .collect();
    even.sort_by(f64::total_cmp);
    odd.sort_by(f64::total_cmp);
    Ok(MoebiusSpectrum { even, odd })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityLabel {
    pub parity: Parity,
    /// `|P v - s v|` for the better-fitting sign `s`.
    pub overlap_defect: f64,
}

/// Rung swap `a_n <-> b_n`.
pub fn rung_swap(v: &[Complex64]) -> Result<Vec<Complex64>, ModelError> {
    if !v.len().is_multiple_of(2) || v.is_empty() {
        return Err(ModelError::OddDimension(v.len()));
    }
    Ok(v.chunks(2).flat_map(|c| [c[1], c[0]]).collect())
}

pub fn parity_classify(v: &[Complex64], tol: f64) -> Result<ParityLabel, ModelError> {
    let pv = rung_swap(v)?;
    if vec_norm(v) == 0.0 {
        return Err(ModelError::ZeroVector);
    }
    let dist = |s: f64| {
        pv.iter()
            .zip(v)
            .map(|(a, b)| (a - b * s).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let (de, dodd) = (dist(1.0), dist(-1.0));
    let label = if de <= dodd {
        ParityLabel {
            parity: if de <= tol { Parity::Even } else { Parity::Mixed },
            overlap_defect: de,
        }
    } else {
        ParityLabel {
            parity: if dodd <= tol { Parity::Odd } else { Parity::Mixed },
            overlap_defect: dodd,
        }
    };
    Ok(label)
}

/// Labels every eigenvector of `h`.
///
/// When `h` commutes with the rung swap, a cluster of numerically degenerate
/// eigenvalues whose vectors came out mixed is re-expressed in a basis of
/// parity eigenvectors by projecting onto the two sectors. The projected
/// vectors replace the originals in `dec`.
pub fn classify_eigenvectors(
    h: &ComplexMatrix,
    dec: &mut EigenDecomposition,
    tol: f64,
) -> Result<Vec<ParityLabel>, ModelError> {
    let mut labels = dec
        .eigenvectors
        .iter()
        .map(|v| parity_classify(v, tol))
        .collect::<Result<Vec<_>, _>>()?;
    if labels.iter().all(|l| l.parity != Parity::Mixed) || !commutes_with_swap(h, tol) {
        return Ok(labels);
    }
    let scale = h.frobenius_norm().max(1.0);
    let radius = f64::EPSILON.sqrt() * scale;
    let n = dec.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..n)
            .filter(|&j| !done[j] && (dec.eigenvalues[j] - dec.eigenvalues[i]).norm() <= radius)
            .collect();
        cluster.iter().for_each(|&j| done[j] = true);
        if cluster.iter().all(|&j| labels[j].parity != Parity::Mixed) {
            continue;
        }
        let mut basis: Vec<(Vec<Complex64>, Parity)> = Vec::new();
        for &j in &cluster {
            let v = &dec.eigenvectors[j];
            let pv = rung_swap(v)?;
            for (sign, parity) in [(1.0, Parity::Even), (-1.0, Parity::Odd)] {
                let mut w: Vec<Complex64> = v.iter().zip(&pv).map(|(a, b)| (a + b * sign) / 2.0).collect();
                for (u, _) in basis.iter().filter(|(_, q)| *q == parity) {
                    let c = inner(u, &w);
                    w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
                let nw = vec_norm(&w);
                if nw > 1e-6 {
                    basis.push((w.into_iter().map(|x| x / nw).collect(), parity));
                }
            }
        }
        if basis.len() != cluster.len() {
            continue;
        }
        // Deterministic order inside the cluster: even sector first.
        basis.sort_by_key(|(_, q)| *q != Parity::Even);
        for (&j, (w, _)) in cluster.iter().zip(basis) {
            labels[j] = parity_classify(&w, tol)?;
            dec.eigenvectors[j] = w;
        }
    }
    Ok(labels)
}

fn commutes_with_swap(h: &ComplexMatrix, tol: f64) -> bool {
    let n = h.dim();
    if !n.is_multiple_of(2) {
        return false;
    }
    let sw = |i: usize| i ^ 1;
    (0..n).all(|i| (0..n).all(|j| (h[(sw(i), sw(j))] - h[(i, j)]).norm() <= tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "lowercase")]
pub enum PtPhase {
    Symmetric,
    Broken { conjugate_paired: bool },
}

/// Symmetric iff every `|Im|` is at most `tol`.
pub fn pt_phase(spectrum: &[Complex64], tol: f64) -> PtPhase {
    if spectrum.iter().all(|z| z.im.abs() <= tol) {
        PtPhase::Symmetric
    } else {
        PtPhase::Broken {
            conjugate_paired: crate::linalg::conjugation_defect(spectrum) <= tol,
        }
    }
}
