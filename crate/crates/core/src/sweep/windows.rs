use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SpectralSweep, SweepError, IM_TOL};

/// A located exceptional point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EPEstimate {
    pub parameter_value: f64,
    /// Smallest distance between the coalescing eigenvalues at the estimate.
    pub gap_at_estimate: f64,
    /// Width of the final bracket, `initial / 2^iterations`.
    pub refinement_width: f64,
    pub iterations: usize,
    /// Gap within the coalescence tolerance and bracket within resolution.
    pub converged: bool,
}

/// A maximal parameter interval where a branch pair is complex conjugate.
///
/// `lower`/`upper` are absent when the window runs into the end of the
/// sweep; `lower_ep`/`upper_ep` then fall back to the sweep bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTWindow {
    pub lower_ep: f64,
    pub upper_ep: f64,
    pub lower: Option<EPEstimate>,
    pub upper: Option<EPEstimate>,
    /// Branch pair at the step of largest splitting.
    pub branch_pair: (usize, usize),
    /// Largest `|Im a - Im b|` over the window's grid points.
    pub max_im_split: f64,
    /// Common real part at the step of largest splitting.
    pub center_re: f64,
    /// First and last grid step inside the window.
    pub step_range: (usize, usize),
}

impl PTWindow {
    pub fn width(&self) -> f64 {
        self.upper_ep - self.lower_ep
    }

    pub fn is_closed(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    pub fn ep_estimates(&self) -> impl Iterator<Item = &EPEstimate> {
        self.lower.iter().chain(self.upper.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowOptions {
    pub im_tol: f64,
    /// Bracket width to reach; `None` uses the model default.
    pub resolution: Option<f64>,
    pub max_bisections: usize,
    /// Bisect boundaries; otherwise report grid brackets.
    pub refine: bool,
    /// Keep only windows whose pair has `|Re E| <= energy_window`.
    pub energy_window: Option<f64>,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self {
            im_tol: IM_TOL,
            resolution: None,
            max_bisections: 200,
            refine: true,
            energy_window: None,
        }
    }
}

pub(crate) type Evaluator<'a> = &'a (dyn Fn(f64) -> Result<Vec<Complex64>, SweepError> + Sync);

/// PT windows with boundaries bisected by re-evaluating the sweep's model.
/// Sweeps without a model keep grid-resolution boundaries.
pub fn detect_pt_windows(sweep: &SpectralSweep, im_tol: f64) -> Result<Vec<PTWindow>, SweepError> {
    let opts = WindowOptions {
        im_tol,
        ..WindowOptions::default()
    };
    match sweep.spec {
        Some(spec) => {
            let eval = move |x: f64| spec.spectrum_at(x);
            detect_pt_windows_with(sweep, opts, Some(&eval))
        }
        None => detect_pt_windows_with(sweep, opts, None),
    }
}

pub fn detect_pt_windows_with(
    sweep: &SpectralSweep,
    opts: WindowOptions,
    evaluator: Option<Evaluator<'_>>,
) -> Result<Vec<PTWindow>, SweepError> {
    let coarse = WindowOptions { refine: false, ..opts };
    let mut out = Vec::new();
    for r in raw_windows(sweep, opts.im_tol) {
        if let Some(w) = opts.energy_window {
            if finish_window(sweep, &r, coarse, None)?.center_re.abs() > w {
                continue;
            }
        }
        out.push(finish_window(sweep, &r, opts, evaluator.filter(|_| opts.refine))?);
    }
    Ok(out)
}

/// Run of grid steps with its per-step conjugate pair.
#[derive(Clone, Debug)]
pub(crate) struct RawWindow {
    pub first: usize,
    pub last: usize,
    pub pairs: Vec<(usize, usize)>,
}

fn pair_tolerance(sweep: &SpectralSweep, im_tol: f64) -> f64 {
    (1e-6 * sweep.scale.max(1.0)).max(100.0 * im_tol)
}

/// Conjugate pairs `(b_up, b_down)` at step `s`: each branch with
/// `Im > im_tol` is paired with the nearest unused `Im < -im_tol` branch to
/// its conjugate.
fn conjugate_pairs(sweep: &SpectralSweep, s: usize, im_tol: f64) -> Vec<(usize, usize)> {
    let tol = pair_tolerance(sweep, im_tol);
    let up: Vec<usize> = (0..sweep.branch_count()).filter(|&b| sweep.branches[b][s].im > im_tol).collect();
    let down: Vec<usize> = (0..sweep.branch_count()).filter(|&b| sweep.branches[b][s].im < -im_tol).collect();
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for &u in &up {
        for &d in &down {
            let dist = (sweep.branches[d][s] - sweep.branches[u][s].conj()).norm();
            if dist <= tol {
                cand.push((dist, u, d));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; sweep.branch_count()];
    let mut out = Vec::new();
    for (_, u, d) in cand {
        if !used[u] && !used[d] {
            used[u] = true;
            used[d] = true;
            out.push((u, d));
        }
    }
    out
}

pub(crate) fn raw_windows(sweep: &SpectralSweep, im_tol: f64) -> Vec<RawWindow> {
    let key = |(u, d): (usize, usize)| (u.min(d), u.max(d));
    let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for s in 0..sweep.steps() {
        for p in conjugate_pairs(sweep, s, im_tol) {
            by_pair.entry(key(p)).or_default().push(s);
        }
    }
    let mut runs: Vec<RawWindow> = Vec::new();
    for (pair, steps) in by_pair {
        let mut start = 0;
        for i in 1..=steps.len() {
            if i == steps.len() || steps[i] != steps[i - 1] + 1 {
                runs.push(RawWindow {
                    first: steps[start],
                    last: steps[i - 1],
                    pairs: vec![pair; i - start],
                });
                start = i;
            }
        }
    }
    // A label swap inside a window splits it into abutting runs that share
    // a branch; stitch those back together.
    loop {
        runs.sort_by_key(|r| (r.first, r.pairs[0]));
        let mut merged = false;
        'outer: for i in 0..runs.len() {
            for j in 0..runs.len() {
                if i == j || runs[i].last + 1 != runs[j].first {
                    continue;
                }
                let (a, b) = (runs[i].pairs[runs[i].pairs.len() - 1], runs[j].pairs[0]);
                if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
                    let next = runs.remove(j);
                    let i = if j < i { i - 1 } else { i };
                    runs[i].last = next.last;
                    runs[i].pairs.extend(next.pairs);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    runs.retain(|r| enters_from_real(sweep, r, im_tol));
    runs.sort_by_key(|r| (r.first, r.last, r.pairs[0]));
    runs
}

/// A window opens and closes at exceptional points, so just outside each
/// interior boundary both members of the pair are real. Runs where the pair
/// merely stops being conjugate while staying complex are not windows.
fn enters_from_real(sweep: &SpectralSweep, r: &RawWindow, im_tol: f64) -> bool {
    let real = |(a, b): (usize, usize), s: usize| {
        sweep.branches[a][s].im.abs() <= im_tol && sweep.branches[b][s].im.abs() <= im_tol
    };
    let lower_ok = r.first == 0 || real(r.pairs[0], r.first - 1);
    let upper_ok = r.last + 1 == sweep.steps() || real(r.pairs[r.pairs.len() - 1], r.last + 1);
    lower_ok && upper_ok
}

pub(crate) fn finish_window(
    sweep: &SpectralSweep,
    raw: &RawWindow,
    opts: WindowOptions,
    evaluator: Option<Evaluator<'_>>,
) -> Result<PTWindow, SweepError> {
    let xs = &sweep.parameter_values;
    let (mut best, mut best_split) = (0, -1.0);
    for (off, &(u, d)) in raw.pairs.iter().enumerate() {
        let s = raw.first + off;
        let split = (sweep.branches[u][s].im - sweep.branches[d][s].im).abs();
        if split > best_split {
            best = off;
            best_split = split;
        }
    }
    let s_best = raw.first + best;
    let pair = raw.pairs[best];
    let center_re = (sweep.branches[pair.0][s_best].re + sweep.branches[pair.1][s_best].re) / 2.0;

    let lower = if raw.first > 0 {
        Some(refine_boundary(sweep, raw.first - 1, raw.first, raw.pairs[0], opts, evaluator)?)
    } else {
        None
    };
    let upper = if raw.last + 1 < sweep.steps() {
        let p = raw.pairs[raw.pairs.len() - 1];
        Some(refine_boundary(sweep, raw.last + 1, raw.last, p, opts, evaluator)?)
    } else {
        None
    };
    Ok(PTWindow {
        lower_ep: lower.map_or(xs[0], |e| e.parameter_value),
        upper_ep: upper.map_or(xs[xs.len() - 1], |e| e.parameter_value),
        lower,
        upper,
        branch_pair: (pair.0.min(pair.1), pair.0.max(pair.1)),
        max_im_split: best_split,
        center_re,
        step_range: (raw.first, raw.last),
    })
}

/// Disc around the pair's real centre used to follow it off the grid.
struct Probe {
    center: Complex64,
    radius: f64,
    im_tol: f64,
}

impl Probe {
    fn broken_count(&self, spectrum: &[Complex64]) -> usize {
        spectrum
            .iter()
            .filter(|z| z.im.abs() > self.im_tol && (*z - self.center).norm() <= self.radius)
            .count()
    }

    fn gap(&self, spectrum: &[Complex64]) -> f64 {
        let near: Vec<Complex64> = spectrum
            .iter()
            .copied()
            .filter(|z| (*z - self.center).norm() <= self.radius)
            .collect();
        let mut g = f64::INFINITY;
        for i in 0..near.len() {
            for j in i + 1..near.len() {
                g = g.min((near[i] - near[j]).norm());
            }
        }
        g
    }
}

/// Bisects between an unbroken step and a broken step. The mean of a
/// coalescing pair is analytic through the EP, so the pair is followed by
/// counting broken eigenvalues in a small disc around that mean.
fn refine_boundary(
    sweep: &SpectralSweep,
    s_out: usize,
    s_in: usize,
    pair: (usize, usize),
    opts: WindowOptions,
    evaluator: Option<Evaluator<'_>>,
) -> Result<EPEstimate, SweepError> {
    let xs = &sweep.parameter_values;
    let v = |b: usize, s: usize| sweep.branches[b][s];
    let center = (v(pair.0, s_in) + v(pair.1, s_in)) / 2.0;
    let spread = [v(pair.0, s_in), v(pair.1, s_in), v(pair.0, s_out), v(pair.1, s_out)]
        .iter()
        .map(|z| (z - center).norm())
        .fold(0.0, f64::max);
    let probe = Probe {
        center,
        radius: 1.5 * spread + 1e-9 * sweep.scale.max(1.0),
        im_tol: opts.im_tol,
    };
    let spec_in = sweep.step_values(s_in);
    let spec_out = sweep.step_values(s_out);
    let (count_in, count_out) = (probe.broken_count(&spec_in), probe.broken_count(&spec_out));
    let resolution = opts
        .resolution
        .or_else(|| sweep.spec.map(|s| s.base.default_resolution()))
        .unwrap_or(1e-13);
    let tol = sweep.coalescence_tol;

    let (mut x_out, mut x_in) = (xs[s_out], xs[s_in]);
    let grid_estimate = |x_out: f64, x_in: f64, iterations: usize| {
        let gap = probe.gap(&spec_in).min(probe.gap(&spec_out));
        let width = (x_in - x_out).abs();
        EPEstimate {
            parameter_value: (x_out + x_in) / 2.0,
            gap_at_estimate: gap,
            refinement_width: width,
            iterations,
            converged: gap <= tol && width <= resolution,
        }
    };
    let Some(eval) = evaluator else {
        return Ok(grid_estimate(x_out, x_in, 0));
    };
    if count_in <= count_out {
        return Ok(grid_estimate(x_out, x_in, 0));
    }
    let mut iterations = 0;
    let mut last = None;
    while iterations < opts.max_bisections {
        let mid = (x_out + x_in) / 2.0;
        if mid == x_out || mid == x_in {
            break;
        }
        let spectrum = eval(mid)?;
        if probe.broken_count(&spectrum) > count_out {
            x_in = mid;
        } else {
            x_out = mid;
        }
        iterations += 1;
        if (x_in - x_out).abs() <= resolution {
            let est = (x_out + x_in) / 2.0;
            let gap = probe.gap(&eval(est)?);
            last = Some((est, gap));
            if gap <= tol {
                break;
            }
        }
    }
    let (est, gap) = match last {
        Some((est, gap)) if est == (x_out + x_in) / 2.0 => (est, gap),
        _ => {
            let est = (x_out + x_in) / 2.0;
            (est, probe.gap(&eval(est)?))
        }
    };
    let width = (x_in - x_out).abs();
    Ok(EPEstimate {
        parameter_value: est,
        gap_at_estimate: gap,
        refinement_width: width,
        iterations,
        converged: gap <= tol && width <= resolution,
    })
}

/// Groups windows that overlap in the parameter and share a real centre
/// (within half the larger splitting). Groups are ordered by their lowest
/// boundary; members from widest to narrowest.
pub fn group_nested(windows: &[PTWindow]) -> Vec<Vec<PTWindow>> {
    let mut sorted = windows.to_vec();
    sorted.sort_by(|a, b| a.lower_ep.total_cmp(&b.lower_ep));
    let mut groups: Vec<Vec<PTWindow>> = Vec::new();
    for w in sorted {
        let home = groups.iter_mut().find(|g| {
            g.iter().any(|m| {
                let overlap = m.lower_ep < w.upper_ep && w.lower_ep < m.upper_ep;
                overlap && (m.center_re - w.center_re).abs() <= 0.5 * m.max_im_split.max(w.max_im_split)
            })
        });
        match home {
            Some(g) => g.push(w),
            None => groups.push(vec![w]),
        }
    }
    for g in &mut groups {
        g.sort_by(|a, b| b.width().total_cmp(&a.width()));
    }
    groups
}
