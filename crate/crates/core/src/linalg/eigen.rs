use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hessenberg::reduce;
use super::matrix::{inner, vec_norm};
use super::qr::hessenberg_qr;
use super::{sort_spectrum, ComplexMatrix, LinalgError, SolverOptions};

/// Eigenvalues with unit-norm right eigenvectors and their residuals.
///
/// `eigenvectors[j]` pairs with `eigenvalues[j]`, and
/// `residuals[j] = |M v_j - lambda_j v_j| / max(1, |M|_F)`.
/// Near an exceptional point two columns may be nearly parallel; they are
/// reported as computed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `|<v_i, v_j>|` for unit vectors; 1 means parallel.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        inner(&self.eigenvectors[i], &self.eigenvectors[j]).norm()
    }
}

const MAX_INVERSE_STEPS: usize = 8;

/// Full eigendecomposition: QR eigenvalues, then inverse iteration on the
/// Hessenberg form for each eigenvector.
pub fn eigen_full(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    eigen_full_with(
        m,
        SolverOptions {
            tol,
            max_iter: None,
        },
    )
}

pub fn eigen_full_with(
    m: &ComplexMatrix,
    opts: SolverOptions,
) -> Result<EigenDecomposition, LinalgError> {
    let tol = opts.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    m.check_finite()?;
    let n = m.dim();
    let (h, q) = reduce(m, true);
    let q = q.expect("accumulated");
    let mut vals = hessenberg_qr(h.clone(), opts.max_iter_for(n))?;
    sort_spectrum(&mut vals);

    let mnorm = m.frobenius_norm();
    let scale = mnorm.max(1.0);
    let cluster_radius = f64::EPSILON.sqrt() * scale;

    let mut hess_vecs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (j, &lambda) in vals.iter().enumerate() {
        let cluster: Vec<usize> = (0..j)
            .filter(|&i| (vals[i] - lambda).norm() <= cluster_radius)
            .collect();
        let lu = ShiftedHessenbergLu::factor(&h, lambda, f64::EPSILON * scale);
        let mut x = start_vector(n, cluster.len());
        let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
        for _ in 0..MAX_INVERSE_STEPS {
            for &i in &cluster {
                let p = inner(&hess_vecs[i], &x);
                for (xk, vk) in x.iter_mut().zip(&hess_vecs[i]) {
                    *xk -= p * vk;
                }
            }
            if vec_norm(&x) == 0.0 {
                x = start_vector(n, cluster.len() + 1);
            }
            let mut y = lu.solve(&x);
            let ny = vec_norm(&y);
            if !(ny.is_finite() && ny > 0.0) {
                break;
            }
            y.iter_mut().for_each(|z| *z /= ny);
            let v = q.mul_vec(&y);
            let r = residual(m, &v, lambda) / scale;
            let better = best.as_ref().is_none_or(|(rb, _, _)| r < *rb);
            if better {
                best = Some((r, y.clone(), v));
            }
            x = y;
            if r <= tol * 1e-2 {
                break;
            }
        }
        match best {
            Some((r, y, v)) if r <= tol => {
                hess_vecs.push(y);
                vectors.push(v);
                residuals.push(r);
            }
            other => {
                return Err(LinalgError::InverseIteration {
                    index: j,
                    residual: other.map_or(f64::INFINITY, |b| b.0),
                })
            }
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: vals,
        eigenvectors: vectors,
        residuals,
    })
}

fn residual(m: &ComplexMatrix, v: &[Complex64], lambda: Complex64) -> f64 {
    let mv = m.mul_vec(v);
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Deterministic, well-spread start vector; `salt` varies it within a cluster.
fn start_vector(n: usize, salt: usize) -> Vec<Complex64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ (salt as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    let mut next = || {
        state ^= state >> 30;
        state = state.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        state ^= state >> 27;
        state = state.wrapping_mul(0x94d0_49bb_1331_11eb);
        state ^= state >> 31;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(1.0 + next(), next())).collect();
    let nv = vec_norm(&v);
    v.into_iter().map(|z| z / nv).collect()
}

/// LU factors of `H - shift I` for upper-Hessenberg `H`, with partial
/// pivoting between adjacent rows. Tiny pivots are lifted to `floor`.
struct ShiftedHessenbergLu {
    n: usize,
    u: Vec<Complex64>,
    swaps: Vec<bool>,
    mults: Vec<Complex64>,
}

impl ShiftedHessenbergLu {
    fn factor(h: &ComplexMatrix, shift: Complex64, floor: f64) -> Self {
        let n = h.dim();
        let mut u: Vec<Complex64> = h.as_slice().to_vec();
        for i in 0..n {
            u[i * n + i] -= shift;
        }
        let mut swaps = vec![false; n.saturating_sub(1)];
        let mut mults = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            let below = u[(k + 1) * n + k];
            if below.norm() > u[k * n + k].norm() {
                swaps[k] = true;
                for j in k..n {
                    u.swap(k * n + j, (k + 1) * n + j);
                }
            }
            if u[k * n + k].norm() < floor {
                u[k * n + k] = Complex64::new(floor, 0.0);
            }
            let l = u[(k + 1) * n + k] / u[k * n + k];
            mults[k] = l;
            u[(k + 1) * n + k] = Complex64::new(0.0, 0.0);
            if l != Complex64::new(0.0, 0.0) {
                for j in k + 1..n {
                    let t = u[k * n + j];
                    u[(k + 1) * n + j] -= l * t;
                }
            }
        }
        if u[n * n - 1].norm() < floor {
            u[n * n - 1] = Complex64::new(floor, 0.0);
        }
        Self { n, u, swaps, mults }
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n.saturating_sub(1) {
            if self.swaps[k] {
                x.swap(k, k + 1);
            }
            let t = x[k];
            x[k + 1] -= self.mults[k] * t;
        }
        for i in (0..n).rev() {
            let row = &self.u[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_gives_standard_basis() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 2.0), c(3.0, 0.0)]);
        let e = eigen_full(&m, 1e-10).unwrap();
        assert_eq!(e.eigenvalues, vec![c(1.0, 2.0), c(3.0, 0.0)]);
        assert!((e.eigenvectors[0][0].norm() - 1.0).abs() < 1e-12);
        assert!(e.eigenvectors[0][1].norm() < 1e-12);
        assert!((e.eigenvectors[1][1].norm() - 1.0).abs() < 1e-12);
        assert!(e.eigenvectors[1][0].norm() < 1e-12);
    }

    #[test]
    fn jordan_block_is_defective() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = eigen_full(&m, 1e-10).unwrap();
        assert!(e.eigenvalues.iter().all(|z| z.norm() == 0.0));
        assert!(e.overlap(0, 1) >= 1.0 - 1e-6);
        assert!(e.max_residual() <= 1e-10);
    }

    #[test]
    fn degenerate_semisimple_gets_independent_vectors() {
        let m = ComplexMatrix::identity(3).scale(c(2.0, -1.0));
        let e = eigen_full(&m, 1e-10).unwrap();
        assert!(e.overlap(0, 1) < 0.5);
        assert!(e.overlap(0, 2) < 0.5);
        assert!(e.overlap(1, 2) < 0.5);
    }

    #[test]
    fn hessenberg_lu_solves() {
        let h = ComplexMatrix::from_fn(5, |i, j| {
            if i > j + 1 {
                c(0.0, 0.0)
            } else {
                c((i + 2 * j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.2)
            }
        });
        let shift = c(0.1, 0.2);
        let lu = ShiftedHessenbergLu::factor(&h, shift, 1e-300);
        let b: Vec<Complex64> = (0..5).map(|i| c(i as f64, 1.0)).collect();
        let x = lu.solve(&b);
        let hx = h.mul_vec(&x);
        for i in 0..5 {
            assert!((hx[i] - shift * x[i] - b[i]).norm() < 1e-10);
        }
    }
}
