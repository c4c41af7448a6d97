use std::f64::consts::PI;

use ladder_core::effective::{
    huckel_eigenvalues, huckel_matrix, moebius4x4_eigenvalues, moebius4x4_matrix, moebius4x4_spectrum_sweep,
    pt2x2_ep_locus, pt2x2_eigenvalues, pt2x2_matrix, spiral_eigenpairs, spiral_matrix, HuckelChainParams,
    Moebius4x4Params, SpiralParams, TwoLevelPT,
};
use ladder_core::lattice::{
    analytic_cll_spectrum, analytic_mll_spectrum, bloch_bands, build_hamiltonian, classify_eigenvectors,
    pt_phase, BoundaryTopology, LadderParams, Parity, PARITY_TOL,
};
use ladder_core::linalg::{eigen_full, eigenvalues, multiset_max_deviation, ComplexMatrix, DEFAULT_TOL};
use ladder_core::sweep::{
    detect_avoided_crossings, detect_pt_windows_with, fit_power_law, gap_vs_size, group_nested,
    group_simultaneous, run_sweep, AvoidedCrossing, ModelDescriptor, PTWindow, ScalingFamily, ScalingSelector,
    SpectralSweep, SweepError, SweepParameter, SweepSpec, WindowOptions,
};
use ladder_core::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    BandsArgs, Command, EffectiveArgs, Family, LadderArgs, Parameter, ScalingArgs, SpectrumArgs, SweepArgs,
    SweepModel, Topology,
};
use crate::error::CliError;
use crate::report::{Report, Table};

pub const EFFECTIVE_MODELS: [&str; 4] = ["spiral", "pt2x2", "huckel", "moebius4x4"];
/// Default feature window for ladders, relative to the bandwidth.
pub const LADDER_WINDOW_REL: f64 = 0.01;

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Bands(a) => bands(a),
        Command::Sweep(a) => sweep(a, true),
        Command::Eps(a) => sweep(a, false),
        Command::Scaling(a) => scaling(a),
        Command::Effective(a) => effective(a),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config_of<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::invalid("missing-parameter", format!("--{flag} is required")))
}

fn positive(flag: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::invalid(
            "invalid-parameter",
            format!("--{flag} must be positive and finite, got {value}"),
        ))
    }
}

fn range_of(values: &[f64], flag: &str) -> Result<(f64, f64), CliError> {
    match values {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::invalid("usage", format!("--{flag} takes two values"))),
    }
}

fn ladder_params(l: &LadderArgs) -> Result<LadderParams, CliError> {
    Ok(LadderParams::new(require(l.n, "n")?, l.d, l.t, l.delta, l.gamma)?)
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
        Parity::Mixed => "mixed",
    }
}

fn max_abs_im(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

fn spectrum(a: &SpectrumArgs) -> Result<Report, CliError> {
    let p = ladder_params(&a.ladder)?;
    let topo: BoundaryTopology = a.ladder.topology.into();
    let h = build_hamiltonian(&p, topo)?;
    let mut dec = eigen_full(&h, DEFAULT_TOL)?;
    let labels = classify_eigenvectors(&h, &mut dec, PARITY_TOL)?;
    let vals = &dec.eigenvalues;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| {
        vals[i]
            .re
            .total_cmp(&vals[j].re)
            .then(vals[i].im.total_cmp(&vals[j].im))
            .then(parity_name(labels[i].parity).cmp(parity_name(labels[j].parity)))
            .then(i.cmp(&j))
    });
    let mut table = Table::new("levels", &["index", "re", "im", "parity", "parity_defect"]);
    for (row, &i) in order.iter().enumerate() {
        table.push(vec![
            row.into(),
            vals[i].re.into(),
            vals[i].im.into(),
            parity_name(labels[i].parity).into(),
            labels[i].overlap_defect.into(),
        ]);
    }
    let count = |q: Parity| labels.iter().filter(|l| l.parity == q).count();
    let closed_form = match topo {
        BoundaryTopology::Circular => Some(analytic_cll_spectrum(&p)?),
        BoundaryTopology::Moebius if p.delta == 0.0 && p.gamma == 0.0 => Some(analytic_mll_spectrum(&p)?.all()),
        BoundaryTopology::Moebius => None,
    };
    let summary = json!({
        "levels": vals.len(),
        "parity_counts": {"even": count(Parity::Even), "odd": count(Parity::Odd), "mixed": count(Parity::Mixed)},
        "pt_phase": pt_phase(vals, ladder_core::sweep::IM_TOL),
        "max_abs_im": max_abs_im(vals),
        "max_residual": dec.max_residual(),
        "closed_form_deviation": closed_form.map(|cf| multiset_max_deviation(vals, &cf)),
    });
    Ok(Report::new("spectrum", config_of(a), summary, vec![table]))
}

fn bands(a: &BandsArgs) -> Result<Report, CliError> {
    let l = &a.ladder;
    let n = if a.overlay { require(l.n, "n")? } else { l.n.unwrap_or(3) };
    let p = LadderParams::new(n, l.d, l.t, l.delta, l.gamma)?;
    let points = bloch_bands(&p, a.k_points)?;
    let mut table = Table::new("bands", &["k", "re_plus", "im_plus", "re_minus", "im_minus"]);
    let mut separation: f64 = 0.0;
    for pt in &points {
        table.push(vec![
            pt.k.into(),
            pt.e_plus.re.into(),
            pt.e_plus.im.into(),
            pt.e_minus.re.into(),
            pt.e_minus.im.into(),
        ]);
        separation = separation.max((pt.e_plus - pt.e_minus).norm());
    }
    let mut tables = vec![table];
    if a.overlay {
        tables.push(overlay(&p, l.topology)?);
    }
    let summary = json!({
        "k_points": points.len(),
        "band_separation": separation,
        "max_abs_im": points.iter().map(|b| b.e_plus.im.abs().max(b.e_minus.im.abs())).fold(0.0, f64::max),
    });
    Ok(Report::new("bands", config_of(a), summary, tables))
}

/// Discrete levels of the finite ladder at their quasi-momenta.
fn overlay(p: &LadderParams, topology: Topology) -> Result<Table, CliError> {
    let mut table = Table::new("levels", &["k", "re", "im", "label"]);
    let nf = p.n as f64;
    let mut rows: Vec<(f64, Complex64, &str)> = Vec::new();
    match topology {
        Topology::Circular => {
            for m in 0..p.n {
                let k = 2.0 * PI * m as f64 / nf;
                let (plus, minus) = ladder_core::lattice::bloch_eigenvalues(k, p)?;
                rows.push((k, plus, "plus"));
                rows.push((k, minus, "minus"));
            }
        }
        Topology::Moebius => {
            // Only defined at zero detuning; this call reports that case.
            analytic_mll_spectrum(p)?;
            for m in 0..p.n {
                let k = 2.0 * PI * m as f64 / nf;
                rows.push((k, c(-2.0 * p.t * k.cos() - p.d, 0.0), "even"));
                let k = (2.0 * m as f64 + 1.0) * PI / nf;
                rows.push((k, c(-2.0 * p.t * k.cos() + p.d, 0.0), "odd"));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.re.total_cmp(&b.1.re)));
    for (k, e, label) in rows {
        table.push(vec![k.into(), e.re.into(), e.im.into(), label.into()]);
    }
    Ok(table)
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec, CliError> {
    let (base, fallback, allowed): (ModelDescriptor, Option<Parameter>, &[Parameter]) = match a.model {
        SweepModel::Ladder => (
            ModelDescriptor::Ladder {
                params: ladder_params(&a.ladder)?,
                topology: a.ladder.topology.into(),
            },
            None,
            &[Parameter::Delta, Parameter::Gamma],
        ),
        SweepModel::Moebius4x4 => (
            ModelDescriptor::Moebius4x4 {
                params: Moebius4x4Params {
                    alpha: c(a.alpha, a.alpha_im),
                    beta: a.beta,
                    xi: a.xi,
                },
            },
            Some(Parameter::Alpha),
            &[Parameter::Alpha],
        ),
        SweepModel::Pt2x2 => (
            ModelDescriptor::TwoLevel {
                params: TwoLevelPT {
                    e1: a.e1,
                    e2: a.e2,
                    gamma_c: a.ladder.gamma,
                    xi: a.xi,
                },
            },
            Some(Parameter::Delta),
            &[Parameter::Delta, Parameter::Gamma],
        ),
    };
    let parameter = require(a.parameter.or(fallback), "parameter")?;
    if !allowed.contains(&parameter) {
        return Err(CliError::invalid(
            "invalid-parameter",
            format!("model {} cannot sweep {}", base.name(), SweepParameter::from(parameter).name()),
        ));
    }
    let spec = SweepSpec {
        parameter: parameter.into(),
        start: require(a.start, "start")?,
        end: require(a.end, "end")?,
        steps: a.steps,
        base,
    };
    spec.validate()?;
    Ok(spec)
}

struct Features {
    crossings: Vec<AvoidedCrossing>,
    crossing_groups: Vec<usize>,
    windows: Vec<PTWindow>,
    window_groups: Vec<usize>,
}

/// Group index of every item, in input order.
fn group_ids<T: PartialEq>(items: &[T], groups: &[Vec<T>]) -> Vec<usize> {
    items
        .iter()
        .map(|x| groups.iter().position(|g| g.contains(x)).unwrap_or(usize::MAX))
        .collect()
}

fn analyze(sweep: &SpectralSweep, window: Option<f64>, im_tol: f64) -> Result<Features, CliError> {
    positive("im-tol", im_tol)?;
    let spec = sweep.spec.ok_or_else(|| CliError::numerical("internal", "sweep lost its model"))?;
    let crossings = match detect_avoided_crossings(sweep, window.unwrap_or(f64::INFINITY)) {
        Ok(found) => found,
        Err(SweepError::WrongRegime { .. }) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let eval = move |x: f64| spec.spectrum_at(x);
    let opts = WindowOptions {
        im_tol,
        energy_window: window,
        ..WindowOptions::default()
    };
    let windows = detect_pt_windows_with(sweep, opts, Some(&eval))?;
    Ok(Features {
        crossing_groups: group_ids(&crossings, &group_simultaneous(&crossings)),
        crossings,
        window_groups: group_ids(&windows, &group_nested(&windows)),
        windows,
    })
}

fn branch_table(sweep: &SpectralSweep) -> Table {
    let mut t = Table::new("branches", &["step", "parameter", "branch", "re", "im"]);
    for (s, &x) in sweep.parameter_values.iter().enumerate() {
        for (b, branch) in sweep.branches.iter().enumerate() {
            t.push(vec![s.into(), x.into(), b.into(), branch[s].re.into(), branch[s].im.into()]);
        }
    }
    t
}

fn feature_tables(f: &Features, with_crossings: bool) -> Vec<Table> {
    let mut out = Vec::new();
    if with_crossings {
        let mut t = Table::new(
            "avoided_crossings",
            &["group", "parameter", "min_gap", "energy", "width", "branch_a", "branch_b", "level_a", "level_b"],
        );
        for (x, &g) in f.crossings.iter().zip(&f.crossing_groups) {
            t.push(vec![
                g.into(),
                x.parameter_value.into(),
                x.min_gap.into(),
                x.energy.into(),
                x.width.into(),
                x.branch_pair.0.into(),
                x.branch_pair.1.into(),
                x.level_pair.0.into(),
                x.level_pair.1.into(),
            ]);
        }
        out.push(t);
    }
    let mut windows = Table::new(
        "pt_windows",
        &["window", "group", "lower", "upper", "width", "closed", "center_re", "max_im_split", "branch_a", "branch_b"],
    );
    let mut eps = Table::new(
        "ep_estimates",
        &["window", "side", "parameter", "gap", "refinement_width", "iterations", "converged"],
    );
    for (i, (w, &g)) in f.windows.iter().zip(&f.window_groups).enumerate() {
        windows.push(vec![
            i.into(),
            g.into(),
            w.lower_ep.into(),
            w.upper_ep.into(),
            w.width().into(),
            w.is_closed().into(),
            w.center_re.into(),
            w.max_im_split.into(),
            w.branch_pair.0.into(),
            w.branch_pair.1.into(),
        ]);
        for (side, ep) in [("lower", &w.lower), ("upper", &w.upper)] {
            if let Some(ep) = ep {
                eps.push(vec![
                    i.into(),
                    side.into(),
                    ep.parameter_value.into(),
                    ep.gap_at_estimate.into(),
                    ep.refinement_width.into(),
                    ep.iterations.into(),
                    ep.converged.into(),
                ]);
            }
        }
    }
    out.push(windows);
    out.push(eps);
    out
}

fn distinct(ids: &[usize]) -> usize {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn feature_summary(sweep: &SpectralSweep, f: &Features, window: Option<f64>) -> Value {
    let (max_im, _) = sweep.max_abs_im();
    let paired = {
        let mut ids = f.crossing_groups.clone();
        ids.sort_unstable();
        ids.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect::<Vec<_>>()
    };
    let eps: Vec<_> = f.windows.iter().flat_map(|w| w.ep_estimates()).collect();
    json!({
        "steps": sweep.steps(),
        "branches": sweep.branch_count(),
        "max_abs_im": max_im,
        "flagged_steps": sweep.flagged_steps.len(),
        "coalescence_tol": sweep.coalescence_tol,
        "energy_window": window,
        "avoided_crossings": f.crossings.len(),
        "crossing_groups": distinct(&f.crossing_groups),
        "paired_crossing_groups": distinct(&paired),
        "pt_windows": f.windows.len(),
        "closed_windows": f.windows.iter().filter(|w| w.is_closed()).count(),
        "window_groups": distinct(&f.window_groups),
        "ep_estimates": eps.len(),
        "converged_eps": eps.iter().filter(|e| e.converged).count(),
    })
}

fn resolve_window(window: Option<f64>, base: &ModelDescriptor) -> Result<Option<f64>, CliError> {
    match (window, base) {
        (Some(w), _) => Ok(Some(positive("window", w)?)),
        (None, ModelDescriptor::Ladder { .. }) => Ok(Some(LADDER_WINDOW_REL * base.scale())),
        (None, _) => Ok(None),
    }
}

fn sweep(a: &SweepArgs, full: bool) -> Result<Report, CliError> {
    let spec = sweep_spec(a)?;
    let window = resolve_window(a.window, &spec.base)?;
    let sw = run_sweep(&spec)?;
    let features = analyze(&sw, window, a.im_tol)?;
    let mut summary = feature_summary(&sw, &features, window);
    summary["model"] = json!(spec.base.name());
    summary["parameter"] = json!(spec.parameter.name());
    let mut tables = Vec::new();
    if full {
        tables.push(branch_table(&sw));
    }
    tables.extend(feature_tables(&features, full));
    Ok(Report::new(if full { "sweep" } else { "eps" }, config_of(a), summary, tables))
}

fn scaling(a: &ScalingArgs) -> Result<Report, CliError> {
    if a.self_test {
        let gaps: Vec<f64> = a.sizes.iter().map(|&n| 3.0 / n as f64).collect();
        let fit = fit_power_law(&a.sizes, &gaps)?;
        if (fit.exponent + 1.0).abs() > 1e-12 || (fit.r_squared - 1.0).abs() > 1e-12 {
            return Err(CliError::numerical(
                "self-test-failed",
                format!("synthetic 3/N gaps fitted exponent {} r2 {}", fit.exponent, fit.r_squared),
            ));
        }
        let mut t = Table::new("gaps", &["size", "gap"]);
        for (&n, &g) in fit.sizes.iter().zip(&fit.gaps) {
            t.push(vec![n.into(), g.into()]);
        }
        let summary = json!({
            "self_test": true,
            "exponent": fit.exponent,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
        });
        return Ok(Report::new("scaling", config_of(a), summary, vec![t]));
    }
    let family = match a.family {
        Family::Hermitian => ScalingFamily::Hermitian { d: a.d, t: a.t },
        Family::Pt => ScalingFamily::Pt { d: a.d, t: a.t },
    };
    let mut selector = ScalingSelector::default_for(&family);
    if let Some(w) = a.window {
        selector.energy_window = positive("window", w)?;
    }
    if let Some(r) = a.reference {
        selector.reference = r;
    }
    if let Some(r) = &a.range {
        selector.range = range_of(r, "range")?;
    }
    if let Some(p) = a.points_per_cell {
        selector.points_per_cell = positive("points-per-cell", p)?;
    }
    let fit = gap_vs_size(&a.sizes, &family, &selector)?;
    let mut t = Table::new("gaps", &["size", "gap", "location"]);
    for ((&n, &g), &x) in fit.sizes.iter().zip(&fit.gaps).zip(&fit.locations) {
        t.push(vec![n.into(), g.into(), x.into()]);
    }
    let summary = json!({
        "self_test": false,
        "family": family,
        "selector": selector,
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
    });
    Ok(Report::new("scaling", config_of(a), summary, vec![t]))
}

fn eigen_table(values: &[Complex64]) -> Table {
    let mut t = Table::new("eigenvalues", &["index", "re", "im"]);
    for (i, z) in values.iter().enumerate() {
        t.push(vec![i.into(), z.re.into(), z.im.into()]);
    }
    t
}

fn numeric_deviation(closed: &[Complex64], m: &ComplexMatrix) -> Result<f64, CliError> {
    Ok(multiset_max_deviation(closed, &eigenvalues(m)?))
}

fn effective(a: &EffectiveArgs) -> Result<Report, CliError> {
    let (summary, tables) = match a.model.as_str() {
        "spiral" => spiral(a)?,
        "pt2x2" => pt2x2(a)?,
        "huckel" => huckel(a)?,
        "moebius4x4" => moebius4x4(a)?,
        other => {
            return Err(CliError::invalid(
                "unknown-model",
                format!("unknown model `{other}`; valid: {}", EFFECTIVE_MODELS.join(", ")),
            ))
        }
    };
    Ok(Report::new("effective", config_of(a), summary, tables))
}

type Outcome = (Value, Vec<Table>);

fn spiral(a: &EffectiveArgs) -> Result<Outcome, CliError> {
    let p = SpiralParams {
        e0: a.e0,
        gamma_rate: c(a.gamma_rate, a.gamma_rate_im),
        v_mag: a.v,
        theta: a.theta,
        eta: a.eta,
    };
    let pairs = spiral_eigenpairs(&p)?;
    let mut t = Table::new("eigenpairs", &["index", "re", "im", "u_re", "u_im", "w_re", "w_im"]);
    for (i, z) in pairs.eigenvalues.iter().enumerate() {
        let v = pairs.eigenvectors.get(i).unwrap_or(&pairs.eigenvectors[0]);
        t.push(vec![
            i.into(),
            z.re.into(),
            z.im.into(),
            v[0].re.into(),
            v[0].im.into(),
            v[1].re.into(),
            v[1].im.into(),
        ]);
    }
    let ratios: Vec<f64> = pairs.eigenvectors.iter().map(|v| v[1].norm() / v[0].norm()).collect();
    let summary = json!({
        "model": "spiral",
        "defective": pairs.defective,
        "sqrt_eta": p.eta.sqrt(),
        "component_ratios": ratios,
        "numeric_deviation": numeric_deviation(&pairs.eigenvalues, &spiral_matrix(&p)?)?,
    });
    Ok((summary, vec![t]))
}

fn pt2x2(a: &EffectiveArgs) -> Result<Outcome, CliError> {
    let p = TwoLevelPT {
        e1: a.e1,
        e2: a.e2,
        gamma_c: a.gamma,
        xi: a.xi,
    };
    let locus = pt2x2_ep_locus(a.gamma, a.xi)?;
    let Some(r) = &a.sweep_delta else {
        let ev = pt2x2_eigenvalues(&p)?;
        let summary = json!({
            "model": "pt2x2",
            "exceptional": ev.exceptional,
            "ep_locus": locus,
            "numeric_deviation": numeric_deviation(&ev.lambda, &pt2x2_matrix(&p)?)?,
        });
        return Ok((summary, vec![eigen_table(&ev.lambda)]));
    };
    let (start, end) = range_of(r, "sweep-delta")?;
    let spec = SweepSpec {
        parameter: SweepParameter::Delta,
        start,
        end,
        steps: a.steps,
        base: ModelDescriptor::TwoLevel { params: p },
    };
    spec.validate()?;
    effective_sweep("pt2x2", &run_sweep(&spec)?, a, json!({ "ep_locus": locus }))
}

fn effective_sweep(model: &str, sw: &SpectralSweep, a: &EffectiveArgs, extra: Value) -> Result<Outcome, CliError> {
    let window = match a.window {
        Some(w) => Some(positive("window", w)?),
        None => None,
    };
    let features = analyze(sw, window, a.im_tol)?;
    let mut summary = feature_summary(sw, &features, window);
    summary["model"] = json!(model);
    if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
        s.extend(e);
    }
    let mut tables = vec![branch_table(sw)];
    tables.extend(feature_tables(&features, true));
    Ok((summary, tables))
}

fn huckel(a: &EffectiveArgs) -> Result<Outcome, CliError> {
    let p = HuckelChainParams {
        n: a.n,
        alpha: c(a.alpha, a.alpha_im),
        beta: a.beta,
    };
    let vals = huckel_eigenvalues(&p)?;
    let mut t = Table::new("levels", &["index", "re", "im", "coefficient", "label"]);
    for (i, z) in vals.iter().enumerate() {
        let x = if a.beta == 0.0 { 0.0 } else { (z - p.alpha).re / a.beta };
        let sign = if x < 0.0 { '-' } else { '+' };
        t.push(vec![
            i.into(),
            z.re.into(),
            z.im.into(),
            x.into(),
            format!("alpha {sign} {:.3} beta", x.abs()).into(),
        ]);
    }
    let summary = json!({
        "model": "huckel",
        "numeric_deviation": numeric_deviation(&vals, &huckel_matrix(&p)?)?,
    });
    Ok((summary, vec![t]))
}

fn moebius4x4(a: &EffectiveArgs) -> Result<Outcome, CliError> {
    let Some(r) = &a.sweep_alpha else {
        let p = Moebius4x4Params {
            alpha: c(a.alpha, a.alpha_im),
            beta: a.beta,
            xi: a.xi,
        };
        let vals = moebius4x4_eigenvalues(&p)?;
        let summary = json!({
            "model": "moebius4x4",
            "numeric_deviation": numeric_deviation(&vals, &moebius4x4_matrix(&p)?)?,
        });
        return Ok((summary, vec![eigen_table(&vals)]));
    };
    let range = range_of(r, "sweep-alpha")?;
    let sw = moebius4x4_spectrum_sweep(a.beta, a.xi, a.alpha_im, range, a.steps)?;
    effective_sweep("moebius4x4", &sw, a, json!({}))
}
