//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ladder_core::effective::{
    huckel_eigenvalues, huckel_matrix, moebius4x4_spectrum_sweep, spiral_eigenpairs, spiral_matrix,
    HuckelChainParams, SpiralParams, EFFECTIVE_COALESCENCE_TOL,
};
use ladder_core::lattice::{
    analytic_cll_spectrum, analytic_mll_spectrum, bloch_eigenvalues, build_hamiltonian,
    classify_eigenvectors, BoundaryTopology, LadderParams, Parity, PtPhase, pt_phase, PARITY_TOL,
};
use ladder_core::linalg::{
    conjugation_defect, determinant, eigen_full, eigenvalues, multiset_max_deviation,
    smallest_pairwise_gap, ComplexMatrix, DEFAULT_TOL,
};
use ladder_core::sweep::{
    detect_avoided_crossings, detect_pt_windows, detect_pt_windows_with, gap_vs_size,
    group_nested, group_simultaneous, run_sweep, ModelDescriptor, ScalingFamily, ScalingSelector,
    SweepParameter, SweepSpec, WindowOptions, IM_TOL,
};
use ladder_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

// Negated so that a NaN comparison fails the check.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const SIZES: [usize; 3] = [4, 20, 100];
/// Features within this distance of zero energy count as "near E = 0".
const NEAR_ZERO: f64 = 0.06;

fn ladder(n: usize, delta: f64, gamma: f64) -> Result<LadderParams, String> {
    LadderParams::new(n, 1.0, 1.0, delta, gamma).map_err(e)
}

fn moebius_sweep(n: usize, parameter: SweepParameter, other: f64, range: (f64, f64), steps: usize) -> Result<SweepSpec, String> {
    let params = match parameter {
        SweepParameter::Gamma => ladder(n, other, 0.0)?,
        _ => ladder(n, 0.0, other)?,
    };
    Ok(SweepSpec {
        parameter,
        start: range.0,
        end: range.1,
        steps,
        base: ModelDescriptor::Ladder {
            params,
            topology: BoundaryTopology::Moebius,
        },
    })
}

fn cll_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for n in SIZES {
        for delta in [0.0, 0.5, 1.0] {
            for gamma in [0.0, 0.5, 1.0] {
                let p = ladder(n, delta, gamma)?;
                let h = build_hamiltonian(&p, BoundaryTopology::Circular).map_err(e)?;
                let dec = eigen_full(&h, DEFAULT_TOL).map_err(e)?;
                let exact = analytic_cll_spectrum(&p).map_err(e)?;
                let dev = multiset_max_deviation(&dec.eigenvalues, &exact);
                ensure!(dev <= 1e-9, "N={n} delta={delta} gamma={gamma}: deviation {dev:e}");
                worst = worst.max(dev);
            }
        }
    }
    Ok(format!("27 cases, max deviation {worst:.2e}"))
}

fn mll_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    let mut worst_even: f64 = 0.0;
    for n in SIZES {
        let p = ladder(n, 0.0, 0.0)?;
        let h = build_hamiltonian(&p, BoundaryTopology::Moebius).map_err(e)?;
        let mut dec = eigen_full(&h, DEFAULT_TOL).map_err(e)?;
        let exact = analytic_mll_spectrum(&p).map_err(e)?;
        let dev = multiset_max_deviation(&dec.eigenvalues, &exact.all());
        ensure!(dev <= 1e-9, "N={n}: deviation {dev:e}");
        worst = worst.max(dev);

        let lower: Vec<Complex64> = (0..n)
            .map(|m| bloch_eigenvalues(2.0 * PI * m as f64 / n as f64, &p).map(|(_, minus)| minus))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let even_closed: Vec<Complex64> = exact.even.iter().map(|&x| c(x, 0.0)).collect();
        let dev_closed = multiset_max_deviation(&even_closed, &lower);
        ensure!(dev_closed <= 1e-14, "N={n}: closed-form even sector off the lower band by {dev_closed:e}");

        let labels = classify_eigenvectors(&h, &mut dec, PARITY_TOL).map_err(e)?;
        let even: Vec<Complex64> = labels
            .iter()
            .zip(&dec.eigenvalues)
            .filter(|(l, _)| l.parity == Parity::Even)
            .map(|(_, &z)| z)
            .collect();
        let dev_even = multiset_max_deviation(&even, &lower);
        ensure!(even.len() == n && dev_even <= 1e-9, "N={n}: {} even states, deviation {dev_even:e}", even.len());
        worst_even = worst_even.max(dev_even);
    }
    Ok(format!("max deviation {worst:.2e}; even sector vs lower band {worst_even:.2e}"))
}

fn bulk_pt_transition() -> Check {
    let mut notes = Vec::new();
    for n in SIZES {
        for gamma in [0.5, 1.0, 1.9, 2.1, 3.0] {
            let p = ladder(n, 0.0, gamma)?;
            let h = build_hamiltonian(&p, BoundaryTopology::Circular).map_err(e)?;
            let spec = eigenvalues(&h).map_err(e)?;
            let phase = pt_phase(&spec, 1e-9);
            let max_im = spec.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if gamma < 2.0 {
                ensure!(phase == PtPhase::Symmetric, "N={n} gamma={gamma}: max |Im| {max_im:e}");
            } else {
                ensure!(
                    phase == PtPhase::Broken { conjugate_paired: true },
                    "N={n} gamma={gamma}: expected conjugate pairs, got {phase:?}"
                );
            }
            if n == 100 {
                notes.push(format!("{gamma}:{max_im:.2e}"));
            }
        }
    }
    Ok(format!("N=100 max |Im| by gamma {}", notes.join(" ")))
}

fn pt_windows_shrink() -> Check {
    let spec = moebius_sweep(100, SweepParameter::Gamma, 0.0, (0.0025, 1.0), 400)?;
    let sweep = run_sweep(&spec).map_err(e)?;
    let eval = move |x: f64| spec.spectrum_at(x);
    let opts = WindowOptions {
        energy_window: Some(NEAR_ZERO),
        ..WindowOptions::default()
    };
    let windows = detect_pt_windows_with(&sweep, opts, Some(&eval)).map_err(e)?;
    let bandwidth = spec.base.scale();
    let closed: Vec<_> = windows.iter().filter(|w| w.is_closed()).collect();
    ensure!(closed.len() >= 2, "only {} closed windows near E=0", closed.len());
    for w in &closed {
        for ep in w.ep_estimates() {
            ensure!(
                ep.converged && ep.gap_at_estimate <= 1e-4 * bandwidth,
                "EP at gamma={} has gap {:e}",
                ep.parameter_value,
                ep.gap_at_estimate
            );
        }
    }
    let outer: Vec<_> = group_nested(&windows)
        .into_iter()
        .map(|g| g[0].clone())
        .filter(|w| w.is_closed())
        .collect();
    ensure!(outer.len() >= 2, "need two closed window groups, found {}", outer.len());
    let widths: Vec<f64> = outer.iter().map(|w| w.width()).collect();
    ensure!(
        widths.windows(2).all(|p| p[1] < p[0]),
        "outer widths not decreasing: {widths:?}"
    );
    let open = windows.len() - closed.len();
    Ok(format!(
        "{} closed windows ({open} open at the sweep end); outer widths {}",
        closed.len(),
        widths.iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>().join(" > ")
    ))
}

fn avoided_crossings_grow() -> Check {
    let spec = moebius_sweep(100, SweepParameter::Delta, 0.0, (0.0, 2.0), 201)?;
    let sweep = run_sweep(&spec).map_err(e)?;
    let found = detect_avoided_crossings(&sweep, NEAR_ZERO).map_err(e)?;
    let pairs: Vec<_> = group_simultaneous(&found).into_iter().filter(|g| g.len() >= 2).collect();
    ensure!(!pairs.is_empty(), "no simultaneous crossings among {} found", found.len());
    for g in &pairs {
        ensure!(
            g[0].min_gap > 0.0 && g[1].min_gap > g[0].min_gap * (1.0 + 1e-6),
            "gaps at delta={} not distinct: {} {}",
            g[0].parameter_value,
            g[0].min_gap,
            g[1].min_gap
        );
    }
    let outer: Vec<f64> = pairs.iter().map(|g| g[g.len() - 1].min_gap).collect();
    ensure!(
        outer.windows(2).all(|p| p[1] > p[0]),
        "outer gaps not increasing: {outer:?}"
    );
    Ok(format!(
        "{} simultaneous pairs, first at delta={:.4} gaps {:.5}/{:.5}; outer gaps {}",
        pairs.len(),
        pairs[0][0].parameter_value,
        pairs[0][0].min_gap,
        pairs[0][1].min_gap,
        outer.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(" < ")
    ))
}

fn generic_case_has_no_eps() -> Check {
    let mut notes = Vec::new();
    for (n, range, steps) in [(100, (0.005, 1.0), 200), (20, (0.01, 3.0), 300)] {
        let spec = moebius_sweep(n, SweepParameter::Gamma, 0.5, range, steps)?;
        let sweep = run_sweep(&spec).map_err(e)?;
        let windows = detect_pt_windows(&sweep, IM_TOL).map_err(e)?;
        let eps = windows.iter().flat_map(|w| w.ep_estimates()).count();
        ensure!(windows.is_empty() && eps == 0, "N={n}: {} windows, {eps} EPs", windows.len());
        notes.push(format!("N={n} max |Im| {:.3}", sweep.max_abs_im().0));
    }
    Ok(format!("delta=0.5 gamma sweeps: 0 windows, 0 EPs ({})", notes.join(", ")))
}

fn inverse_size_scaling() -> Check {
    let sizes = [50, 100, 200];
    let mut notes = Vec::new();
    for family in [ScalingFamily::Hermitian { d: 1.0, t: 1.0 }, ScalingFamily::Pt { d: 1.0, t: 1.0 }] {
        let fit = gap_vs_size(&sizes, &family, &ScalingSelector::default_for(&family)).map_err(e)?;
        let name = match family {
            ScalingFamily::Hermitian { .. } => "dE",
            ScalingFamily::Pt { .. } => "dgamma",
        };
        ensure!(
            (-1.05..=-0.95).contains(&fit.exponent) && fit.r_squared >= 0.99,
            "{name}: exponent {} r2 {} gaps {:?}",
            fit.exponent,
            fit.r_squared,
            fit.gaps
        );
        notes.push(format!("{name} exponent {:.4} r2 {:.5}", fit.exponent, fit.r_squared));
    }
    Ok(notes.join("; "))
}

fn huckel_four() -> Check {
    let p = HuckelChainParams {
        n: 4,
        alpha: c(0.0, 0.0),
        beta: 1.0,
    };
    let got = huckel_eigenvalues(&p).map_err(e)?;
    let rounded: Vec<Complex64> = [-1.618, -0.618, 0.618, 1.618].iter().map(|&x| c(x, 0.0)).collect();
    let dev_rounded = multiset_max_deviation(&got, &rounded);
    ensure!(dev_rounded <= 1e-3, "deviation from rounded values {dev_rounded:e}");
    let s5 = 5f64.sqrt();
    let exact: Vec<Complex64> = [(3.0 + s5) / 2.0, (3.0 - s5) / 2.0]
        .iter()
        .flat_map(|x2: &f64| [c(x2.sqrt(), 0.0), c(-x2.sqrt(), 0.0)])
        .collect();
    let dev_exact = multiset_max_deviation(&got, &exact);
    ensure!(dev_exact <= 1e-10, "deviation from x^2 = (3 +- sqrt 5)/2 roots {dev_exact:e}");
    let numeric = eigenvalues(&huckel_matrix(&p).map_err(e)?).map_err(e)?;
    let dev_numeric = multiset_max_deviation(&got, &numeric);
    ensure!(dev_numeric <= 1e-10, "deviation from the numeric spectrum {dev_numeric:e}");
    Ok(format!("rounded {dev_rounded:.1e}, exact {dev_exact:.1e}, numeric {dev_numeric:.1e}"))
}

fn spiral_draws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_val, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let p = SpiralParams {
            e0: rng.gen_range(-2.0..2.0),
            gamma_rate: c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            v_mag: rng.gen_range(0.01..2.0),
            theta: rng.gen_range(0.0..2.0 * PI),
            eta: rng.gen_range(0.01..1.0),
        };
        let pairs = spiral_eigenpairs(&p).map_err(e)?;
        let m = spiral_matrix(&p).map_err(e)?;
        let center = c(p.e0, 0.0) + p.gamma_rate;
        let split = p.eta.sqrt() * p.v_mag;
        let formula = [center + split, center - split];
        let numeric = eigenvalues(&m).map_err(e)?;
        let dev = multiset_max_deviation(&pairs.eigenvalues, &formula)
            .max(multiset_max_deviation(&pairs.eigenvalues, &numeric));
        ensure!(!pairs.defective && dev <= 1e-10, "{p:?}: eigenvalue deviation {dev:e}");
        for (v, lambda) in pairs.eigenvectors.iter().zip(pairs.eigenvalues) {
            let ratio = (v[1].norm() / v[0].norm() - p.eta.sqrt()).abs();
            let mv = m.mul_vec(v);
            let res = ((mv[0] - lambda * v[0]).norm()).max((mv[1] - lambda * v[1]).norm());
            ensure!(ratio <= 1e-10 && res <= 1e-10, "{p:?}: ratio error {ratio:e}, residual {res:e}");
            worst_ratio = worst_ratio.max(ratio);
        }
        worst_val = worst_val.max(dev);
    }
    let chiral = SpiralParams {
        e0: 0.0,
        gamma_rate: c(0.0, -0.1),
        v_mag: 1.0,
        theta: 0.3,
        eta: 0.0,
    };
    ensure!(spiral_eigenpairs(&chiral).map_err(e)?.defective, "eta = 0 not flagged defective");
    Ok(format!("100 draws: eigenvalues {worst_val:.1e}, sqrt(eta) ratio {worst_ratio:.1e}; eta=0 defective"))
}

fn four_by_four_regimes() -> Check {
    let range = (-4.0, 4.0);
    let hermitian = moebius4x4_spectrum_sweep(1.0, 0.0, 0.0, range, 401).map_err(e)?;
    let (max_im, _) = hermitian.max_abs_im();
    ensure!(max_im <= 1e-9, "xi=0: max |Im| {max_im:e}");
    let crossings = detect_avoided_crossings(&hermitian, f64::INFINITY).map_err(e)?;
    let e1 = 2.0 * (PI / 5.0).cos();
    let e2 = 2.0 * (2.0 * PI / 5.0).cos();
    let mut gaps: Vec<f64> = crossings.iter().map(|x| x.min_gap).collect();
    gaps.sort_by(f64::total_cmp);
    ensure!(
        crossings.len() == 2
            && crossings.iter().all(|x| x.parameter_value.abs() <= 1e-9)
            && (gaps[0] - 2.0 * e2).abs() <= 1e-9
            && (gaps[1] - 2.0 * e1).abs() <= 1e-9,
        "xi=0: crossings {crossings:?}"
    );

    let pt = moebius4x4_spectrum_sweep(1.0, 2.0, 0.0, range, 401).map_err(e)?;
    let windows = detect_pt_windows(&pt, IM_TOL).map_err(e)?;
    let mut bounds: Vec<(f64, f64)> = windows.iter().map(|w| (w.lower_ep, w.upper_ep)).collect();
    bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s3 = 3f64.sqrt();
    let expected = [(-s3 * e1, s3 * e1), (-s3 * e2, s3 * e2)];
    ensure!(
        windows.len() == 2
            && windows.iter().all(|w| w.is_closed() && w.ep_estimates().all(|ep| ep.converged))
            && bounds
                .iter()
                .zip(&expected)
                .all(|(b, x)| (b.0 - x.0).abs() <= 1e-8 && (b.1 - x.1).abs() <= 1e-8),
        "xi=2: windows {bounds:?}, expected {expected:?}"
    );

    let generic = moebius4x4_spectrum_sweep(1.0, 2.0, 0.3, range, 401).map_err(e)?;
    let mut min_gap = f64::INFINITY;
    for s in 0..generic.steps() {
        min_gap = min_gap.min(smallest_pairwise_gap(&generic.step_values(s)).map_err(e)?.gap);
    }
    ensure!(min_gap > EFFECTIVE_COALESCENCE_TOL, "Im alpha=0.3: min gap {min_gap:e}");
    let spurious = detect_pt_windows(&generic, IM_TOL).map_err(e)?;
    ensure!(spurious.is_empty(), "Im alpha=0.3: {} windows reported", spurious.len());
    Ok(format!(
        "xi=0 gaps {:.4}/{:.4}; xi=2 EPs +-{:.4}, +-{:.4}; Im alpha=0.3 min gap {min_gap:.4}, 0 windows",
        gaps[0], gaps[1], bounds[0].1, bounds[1].1
    ))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, real: bool) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| {
        let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
        c(rng.gen_range(-1.0..1.0), im)
    })
}

/// Householder reflector `I - 2 v v* / |v|^2`; unitary and its own inverse.
fn reflector(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let v: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    ComplexMatrix::from_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        c(id, 0.0) - v[i] * v[j].conj() * (2.0 / norm2)
    })
}

fn solver_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_res: f64 = 0.0;
    for case in 0..200 {
        let n = 1 + case % 16;
        let m = random_matrix(&mut rng, n, case % 2 == 0);
        let scale = m.frobenius_norm().max(1.0);
        let dec = eigen_full(&m, DEFAULT_TOL).map_err(e)?;
        let res = dec.max_residual();
        ensure!(res <= 1e-10, "case {case} (n={n}): residual {res:e}");
        worst_res = worst_res.max(res);

        let vals = &dec.eigenvalues;
        let trace_err = (vals.iter().sum::<Complex64>() - m.trace()).norm();
        ensure!(trace_err <= 1e-8 * m.trace().norm().max(1.0), "case {case}: trace error {trace_err:e}");
        let det = determinant(&m);
        let det_err = (vals.iter().product::<Complex64>() - det).norm();
        ensure!(det_err <= 1e-6 * det.norm().max(1e-300), "case {case}: determinant error {det_err:e}");

        let conj = eigenvalues(&m.conj()).map_err(e)?;
        let mirrored: Vec<Complex64> = vals.iter().map(|z| z.conj()).collect();
        let conj_err = multiset_max_deviation(&conj, &mirrored);
        ensure!(conj_err <= 1e-8 * scale, "case {case}: conjugation error {conj_err:e}");
        if case % 2 == 0 {
            let defect = conjugation_defect(vals);
            ensure!(defect <= 1e-8 * scale, "case {case}: real matrix spectrum not conjugate-closed ({defect:e})");
        }

        let u = reflector(&mut rng, n);
        let d: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let similar = ComplexMatrix::from_fn(n, |i, j| m[(i, j)] * d[i] / d[j]);
        let similar = u.matmul(&similar).matmul(&u);
        let sim_err = multiset_max_deviation(&eigenvalues(&similar).map_err(e)?, vals);
        ensure!(sim_err <= 1e-8 * scale, "case {case}: similarity error {sim_err:e}");
    }
    Ok(format!("200 matrices n<=16, max residual {worst_res:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("CLL oracle equivalence", cll_oracle),
        ("MLL closed form and even sector", mll_closed_form),
        ("bulk PT transition at gamma = 2d", bulk_pt_transition),
        ("PT windows near E=0 shrink with gamma", pt_windows_shrink),
        ("simultaneous avoided crossings grow with delta", avoided_crossings_grow),
        ("generic case has no PT transitions", generic_case_has_no_eps),
        ("gaps scale as 1/N", inverse_size_scaling),
        ("Hueckel n=4", huckel_four),
        ("spiral model", spiral_draws),
        ("4x4 regimes", four_by_four_regimes),
        ("solver property suite", solver_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {reason} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
