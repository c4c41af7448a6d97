use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Upper-Hessenberg form `h` and unitary `q` with `m = q * h * q^H`.
#[derive(Clone, Debug)]
pub struct Hessenberg {
    pub h: ComplexMatrix,
    pub q: ComplexMatrix,
}

/// Householder reduction to upper-Hessenberg form.
///
/// Columns whose entries below the subdiagonal are already zero are left
/// untouched, so a Hessenberg input comes back unchanged with `q = I`.
pub fn hessenberg_reduce(m: &ComplexMatrix) -> Result<Hessenberg, LinalgError> {
    m.check_finite()?;
    let (h, q) = reduce(m, true);
    Ok(Hessenberg {
        h,
        q: q.expect("accumulated"),
    })
}

pub(crate) fn reduce(m: &ComplexMatrix, want_q: bool) -> (ComplexMatrix, Option<ComplexMatrix>) {
    let n = m.dim();
    let mut a = m.clone();
    let mut q = want_q.then(|| ComplexMatrix::identity(n));
    let zero = Complex64::new(0.0, 0.0);

    let mut v = vec![zero; n];
    let mut s = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let tail: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;

        let len = n - k - 1;
        let v = &mut v[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // a <- P a, rows k+1.., columns k+1.. (column k is set explicitly below)
        let s = &mut s[..n];
        s.iter_mut().for_each(|x| *x = zero);
        for (i, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            let row = a.row(k + 1 + i);
            for j in k + 1..n {
                s[j] += vc * row[j];
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let r = k + 1 + i;
            for j in k + 1..n {
                let d = vi * s[j] * beta;
                a[(r, j)] -= d;
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero;
        }

        // a <- a P, all rows, columns k+1..
        apply_right(&mut a, v, beta, k + 1);
        if let Some(q) = q.as_mut() {
            apply_right(q, v, beta, k + 1);
        }
    }
    (a, q)
}

/// `m <- m (I - beta v v^H)` acting on columns `offset..`.
fn apply_right(m: &mut ComplexMatrix, v: &[Complex64], beta: f64, offset: usize) {
    let n = m.dim();
    for r in 0..n {
        let s: Complex64 = (0..v.len()).map(|i| m[(r, offset + i)] * v[i]).sum::<Complex64>() * beta;
        if s == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (i, vi) in v.iter().enumerate() {
            m[(r, offset + i)] -= s * vi.conj();
        }
    }
}
