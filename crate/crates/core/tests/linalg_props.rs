use ladder_core::linalg::{
    determinant, eigen_full, eigenvalues, eigenvalues_qr, multiset_max_deviation, ComplexMatrix,
    SolverOptions,
};
use ladder_core::Complex64;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..=16).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |entries| {
            ComplexMatrix::from_fn(n, |i, j| {
                let (re, im) = entries[i * n + j];
                Complex64::new(re, im)
            })
        })
    })
}

fn qr(m: &ComplexMatrix) -> Vec<Complex64> {
    let opts = SolverOptions::default();
    eigenvalues_qr(m, opts.tol, opts.max_iter_for(m.dim())).unwrap()
}

fn scale(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn diagonal_similarity_preserves_spectrum(
        m in matrix(),
        d in prop::collection::vec((0.25f64..4.0, 0.0f64..std::f64::consts::TAU), 16),
    ) {
        let n = m.dim();
        let d: Vec<Complex64> = d[..n].iter().map(|&(r, phi)| Complex64::from_polar(r, phi)).collect();
        let similar = ComplexMatrix::from_fn(n, |i, j| m[(i, j)] * d[i] / d[j]);
        let dev = multiset_max_deviation(&qr(&similar), &qr(&m));
        prop_assert!(dev <= 1e-8 * scale(&m), "deviation {dev:e}");
    }

    #[test]
    fn conjugate_matrix_has_conjugate_spectrum(m in matrix()) {
        let mirrored: Vec<Complex64> = qr(&m).iter().map(|z| z.conj()).collect();
        let dev = multiset_max_deviation(&qr(&m.conj()), &mirrored);
        prop_assert!(dev <= 1e-8 * scale(&m), "deviation {dev:e}");
    }

    #[test]
    fn eigenvalues_sum_to_trace(m in matrix()) {
        let tr = m.trace();
        let err = (eigenvalues(&m).unwrap().iter().sum::<Complex64>() - tr).norm();
        prop_assert!(err <= 1e-8 * tr.norm().max(1.0), "error {err:e}");
    }

    #[test]
    fn eigenvalues_multiply_to_determinant(m in matrix()) {
        let det = determinant(&m);
        let err = (eigenvalues(&m).unwrap().iter().product::<Complex64>() - det).norm();
        prop_assert!(err <= 1e-6 * det.norm(), "error {err:e} for det {det}");
    }

    #[test]
    fn residuals_honour_tolerance(m in matrix(), tol in prop::sample::select(vec![1e-10, 1e-8, 1e-6])) {
        let dec = eigen_full(&m, tol).unwrap();
        prop_assert_eq!(dec.len(), m.dim());
        prop_assert!(dec.residuals.iter().all(|&r| r <= tol), "residuals {:?}", dec.residuals);
    }
}
