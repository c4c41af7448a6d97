use num_complex::Complex64;

use super::hessenberg::reduce;
use super::{sort_spectrum, ComplexMatrix, LinalgError};

/// Eigenvalues by single-shift QR on the Hessenberg form.
///
/// `tol` bounds the relative backward error the caller is prepared to
/// accept; deflation itself always happens at working precision, which is
/// never looser than `tol`. `max_iter` caps the total number of QR sweeps.
/// The result is sorted by real part, then imaginary part.
pub fn eigenvalues_qr(
    m: &ComplexMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<Complex64>, LinalgError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    m.check_finite()?;
    let (h, _) = reduce(m, false);
    let mut vals = hessenberg_qr(h, max_iter)?;
    sort_spectrum(&mut vals);
    Ok(vals)
}

/// Givens rotation `(c, s)` with real `c` such that
/// `[c, s; -conj(s), c] * [a; b] = [r; 0]`.
#[inline]
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Eigenvalue of the 2x2 block `[a, b; c, d]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Runs the QR iteration on an upper-Hessenberg matrix, destroying it.
/// Only the active diagonal block is updated, so no Schur form is produced.
pub(crate) fn hessenberg_qr(
    mut h: ComplexMatrix,
    max_iter: usize,
) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut w = vec![zero; n];
    let norm = h.frobenius_norm();
    let ulp = f64::EPSILON;
    let small = f64::MIN_POSITIVE / ulp;

    let mut hi = n as isize - 1;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi >= 0 {
        let hu = hi as usize;
        let mut l = hu;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut tst = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if tst == 0.0 {
                tst = norm;
            }
            if sub <= ulp * tst || sub <= small {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hu {
            w[hu] = h[(hu, hu)];
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= max_iter {
            return Err(LinalgError::NotConverged {
                iterations: total,
                active: hu + 1,
            });
        }
        total += 1;
        its += 1;

        let mu = if its.is_multiple_of(10) {
            h[(hu, hu)] + Complex64::new(0.75 * h[(hu, hu - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hu - 1, hu - 1)],
                h[(hu - 1, hu)],
                h[(hu, hu - 1)],
                h[(hu, hu)],
            )
        };

        for k in l..=hu {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in l..hu {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            let (top, bottom) = h.rows_pair_mut(k);
            for (x, y) in top[k..=hu].iter_mut().zip(&mut bottom[k..=hu]) {
                let (a, b) = (*x, *y);
                *x = a * c + s * b;
                *y = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = zero;
        }
        // Right rotations row by row: row i is touched by rotations k >= i - 1.
        for i in l..=hu {
            let row = h.row_mut(i);
            for (off, &(c, s)) in rots.iter().enumerate().skip(i.saturating_sub(1).saturating_sub(l)) {
                let k = l + off;
                let (a, b) = (row[k], row[k + 1]);
                row[k] = a * c + b * s.conj();
                row[k + 1] = -a * s + b * c;
            }
        }
        for k in l..=hu {
            h[(k, k)] += mu;
        }
    }
    Ok(w)
}
