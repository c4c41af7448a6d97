use serde::{Deserialize, Serialize};

use super::crossings::{detect_avoided_crossings, group_simultaneous};
use super::windows::{finish_window, group_nested, raw_windows, WindowOptions};
use super::{run_sweep, ModelDescriptor, SweepError, SweepParameter, SweepSpec, IM_TOL};
use crate::lattice::{BoundaryTopology, LadderParams};

/// Least-squares fit of `log(gap) = intercept + exponent * log(N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScalingFit {
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Parameter value of the selected feature per size, when measured.
    pub locations: Vec<f64>,
}

pub fn fit_power_law(sizes: &[usize], gaps: &[f64]) -> Result<GapScalingFit, SweepError> {
    if sizes.len() < 3 || sizes.len() != gaps.len() {
        return Err(SweepError::TooFewSizes(sizes.len().min(gaps.len())));
    }
    for (&n, &g) in sizes.iter().zip(gaps) {
        if !(g > 0.0 && g.is_finite()) {
            return Err(SweepError::NonPositiveGap { size: n, gap: g });
        }
    }
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 || distinct[0] == 0 {
        return Err(SweepError::InvalidSpec("sizes must be positive and not all equal".into()));
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - exponent * a).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(GapScalingFit {
        sizes: sizes.to_vec(),
        gaps: gaps.to_vec(),
        exponent,
        intercept,
        r_squared,
        locations: Vec::new(),
    })
}

/// Moebius ladders at zero detuning of the other on-site parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ScalingFamily {
    /// `gamma = 0`, sweep `delta`; the gap is the avoided-crossing minimum.
    Hermitian { d: f64, t: f64 },
    /// `delta = 0`, sweep `gamma`; the gap is the EP-to-EP window width.
    Pt { d: f64, t: f64 },
}

/// Which near-zero feature is measured at each size, and on what grid.
///
/// Features near zero energy come in groups: two avoided crossings at one
/// `delta`, or two nested PT windows around one real energy. The group
/// closest to `reference` is selected, and within it the smallest gap or
/// the narrowest window. The grid has `ceil(points_per_cell * N * range)`
/// intervals, so its spacing shrinks like the features themselves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSelector {
    pub energy_window: f64,
    pub reference: f64,
    pub range: (f64, f64),
    pub points_per_cell: f64,
}

impl ScalingSelector {
    pub fn hermitian_default() -> Self {
        Self {
            energy_window: 0.06,
            reference: 1.7,
            range: (1.45, 1.95),
            points_per_cell: 1.0,
        }
    }

    pub fn pt_default() -> Self {
        Self {
            energy_window: 0.06,
            reference: 0.8,
            range: (0.6, 1.0),
            points_per_cell: 1.25,
        }
    }

    pub fn default_for(family: &ScalingFamily) -> Self {
        match family {
            ScalingFamily::Hermitian { .. } => Self::hermitian_default(),
            ScalingFamily::Pt { .. } => Self::pt_default(),
        }
    }

    fn steps(&self, n: usize) -> usize {
        let span = self.range.1 - self.range.0;
        (self.points_per_cell * n as f64 * span).ceil() as usize + 1
    }
}

/// Gap of the selected feature for one ladder size, and where it sits.
pub fn measure_gap(
    n: usize,
    family: &ScalingFamily,
    selector: &ScalingSelector,
) -> Result<(f64, f64), SweepError> {
    let (d, t, parameter) = match *family {
        ScalingFamily::Hermitian { d, t } => (d, t, SweepParameter::Delta),
        ScalingFamily::Pt { d, t } => (d, t, SweepParameter::Gamma),
    };
    let spec = SweepSpec {
        parameter,
        start: selector.range.0,
        end: selector.range.1,
        steps: selector.steps(n).max(3),
        base: ModelDescriptor::Ladder {
            params: LadderParams::new(n, d, t, 0.0, 0.0)?,
            topology: BoundaryTopology::Moebius,
        },
    };
    let sweep = run_sweep(&spec)?;
    let missing = || SweepError::NoFeature { size: n };
    match family {
        ScalingFamily::Hermitian { .. } => {
            let found = detect_avoided_crossings(&sweep, selector.energy_window)?;
            let groups = group_simultaneous(&found);
            let group = groups
                .iter()
                .min_by(|a, b| {
                    let da = (a[0].parameter_value - selector.reference).abs();
                    let db = (b[0].parameter_value - selector.reference).abs();
                    da.total_cmp(&db)
                })
                .ok_or_else(missing)?;
            Ok((group[0].min_gap, group[0].parameter_value))
        }
        ScalingFamily::Pt { .. } => {
            let opts = WindowOptions::default();
            let coarse = WindowOptions { refine: false, ..opts };
            let steps = sweep.steps();
            let raws: Vec<_> = raw_windows(&sweep, IM_TOL)
                .into_iter()
                .filter(|r| r.first > 0 && r.last + 1 < steps)
                .collect();
            let mut windows = Vec::with_capacity(raws.len());
            for r in &raws {
                windows.push(finish_window(&sweep, r, coarse, None)?);
            }
            windows.retain(|w| w.center_re.abs() <= selector.energy_window);
            let groups = group_nested(&windows);
            let mid = |w: &super::PTWindow| (w.lower_ep + w.upper_ep) / 2.0;
            let group = groups
                .iter()
                .min_by(|a, b| {
                    let da = (mid(&a[0]) - selector.reference).abs();
                    let db = (mid(&b[0]) - selector.reference).abs();
                    da.total_cmp(&db)
                })
                .ok_or_else(missing)?;
            let narrowest = &group[group.len() - 1];
            let raw = raws
                .iter()
                .find(|r| (r.first, r.last) == narrowest.step_range && raw_pair_matches(r, narrowest))
                .ok_or_else(missing)?;
            let eval = |x: f64| spec.spectrum_at(x);
            let refined = finish_window(&sweep, raw, opts, Some(&eval))?;
            if !refined.ep_estimates().all(|e| e.converged) {
                return Err(missing());
            }
            Ok((refined.width(), mid(&refined)))
        }
    }
}

fn raw_pair_matches(raw: &super::windows::RawWindow, w: &super::PTWindow) -> bool {
    raw.pairs
        .iter()
        .any(|&(a, b)| (a.min(b), a.max(b)) == w.branch_pair)
}

/// Measures the selected gap at every size and fits a power law.
pub fn gap_vs_size(
    sizes: &[usize],
    family: &ScalingFamily,
    selector: &ScalingSelector,
) -> Result<GapScalingFit, SweepError> {
    if sizes.len() < 3 {
        return Err(SweepError::TooFewSizes(sizes.len()));
    }
    let mut gaps = Vec::with_capacity(sizes.len());
    let mut locations = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (g, x) = measure_gap(n, family, selector)?;
        gaps.push(g);
        locations.push(x);
    }
    let mut fit = fit_power_law(sizes, &gaps)?;
    fit.locations = locations;
    Ok(fit)
}
