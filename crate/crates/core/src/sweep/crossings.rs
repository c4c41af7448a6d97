use serde::{Deserialize, Serialize};

use super::{SpectralSweep, SweepError, IM_TOL};

/// A refined minimum of the gap between two adiabatic (energy-ordered) levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidedCrossing {
    pub parameter_value: f64,
    pub min_gap: f64,
    /// Branch ids holding the two levels at the grid point nearest the minimum.
    pub branch_pair: (usize, usize),
    /// Positions of the two levels in the energy-ordered spectrum.
    pub level_pair: (usize, usize),
    /// Mean energy of the pair at the minimum.
    pub energy: f64,
    /// Parameter half-width `gap / slope` of the hyperbolic gap profile.
    pub width: f64,
}

/// Levels further apart than this in the ordering are never paired.
const MAX_LEVEL_SEPARATION: usize = 3;
/// The gap must grow by this factor on both sides of a minimum.
const PROMINENCE: f64 = 2.0;

/// Avoided crossings whose mean energy lies in `[-window, window]`.
///
/// Gaps are measured between energy-ordered levels, so the result does not
/// depend on how the branch matcher resolved the crossing. Each local minimum
/// is refined by a parabola through `gap^2` at the three nearest grid points,
/// which is exact for a two-level hyperbola. Minima at or below the sweep's
/// coalescence tolerance are true crossings and are dropped. When several
/// candidate pairs share a level at the same location, the smallest gap wins,
/// so four levels meeting at one point give two crossings.
pub fn detect_avoided_crossings(
    sweep: &SpectralSweep,
    window: f64,
) -> Result<Vec<AvoidedCrossing>, SweepError> {
    let (max_im, at) = sweep.max_abs_im();
    if max_im > IM_TOL * sweep.scale.max(1.0) {
        return Err(SweepError::WrongRegime {
            max_im,
            parameter_value: sweep.parameter_values[at],
        });
    }
    let steps = sweep.steps();
    let width = sweep.branch_count();
    if steps < 3 || width < 2 {
        return Ok(Vec::new());
    }
    let xs = &sweep.parameter_values;
    // order[s][k] = branch holding level k at step s.
    let order: Vec<Vec<usize>> = (0..steps)
        .map(|s| {
            let mut idx: Vec<usize> = (0..width).collect();
            idx.sort_by(|&a, &b| {
                sweep.branches[a][s]
                    .re
                    .total_cmp(&sweep.branches[b][s].re)
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();
    let level = |s: usize, k: usize| sweep.branches[order[s][k]][s].re;

    let mut candidates = Vec::new();
    let mut gap = vec![0.0; steps];
    for k in 0..width {
        for l in k + 1..width.min(k + 1 + MAX_LEVEL_SEPARATION) {
            for (s, g) in gap.iter_mut().enumerate() {
                *g = level(s, l) - level(s, k);
            }
            for i in 1..steps - 1 {
                if !(gap[i - 1] > gap[i] && gap[i] <= gap[i + 1]) {
                    continue;
                }
                let energy_here = (level(i, k) + level(i, l)) / 2.0;
                if energy_here.abs() > window {
                    continue;
                }
                let left = gap[..i].iter().copied().fold(0.0, f64::max);
                let right = gap[i + 1..].iter().copied().fold(0.0, f64::max);
                if left < PROMINENCE * gap[i] || right < PROMINENCE * gap[i] {
                    continue;
                }
                let Some((x0, g2, curv)) = parabola_vertex(
                    [xs[i - 1], xs[i], xs[i + 1]],
                    [gap[i - 1].powi(2), gap[i].powi(2), gap[i + 1].powi(2)],
                ) else {
                    continue;
                };
                let min_gap = g2.max(0.0).sqrt();
                if min_gap <= sweep.coalescence_tol {
                    continue;
                }
                let nearest = if (x0 - xs[i - 1]).abs() < (x0 - xs[i]).abs() {
                    i - 1
                } else if (x0 - xs[i + 1]).abs() < (x0 - xs[i]).abs() {
                    i + 1
                } else {
                    i
                };
                let (b1, b2) = (order[nearest][k], order[nearest][l]);
                candidates.push(AvoidedCrossing {
                    parameter_value: x0,
                    min_gap,
                    branch_pair: (b1.min(b2), b1.max(b2)),
                    level_pair: (k, l),
                    energy: energy_here,
                    width: min_gap / curv.sqrt(),
                });
            }
        }
    }

    candidates.sort_by(|a, b| {
        a.min_gap
            .total_cmp(&b.min_gap)
            .then(a.parameter_value.total_cmp(&b.parameter_value))
            .then(a.level_pair.cmp(&b.level_pair))
    });
    let step = (xs[steps - 1] - xs[0]).abs() / (steps - 1) as f64;
    let mut accepted: Vec<AvoidedCrossing> = Vec::new();
    for c in candidates {
        let clash = accepted.iter().any(|a| {
            let shares = a.level_pair.0 == c.level_pair.0
                || a.level_pair.0 == c.level_pair.1
                || a.level_pair.1 == c.level_pair.0
                || a.level_pair.1 == c.level_pair.1;
            shares && (a.parameter_value - c.parameter_value).abs() <= a.width.max(c.width).max(step)
        });
        if !clash {
            accepted.push(c);
        }
    }
    accepted.sort_by(|a, b| {
        a.parameter_value
            .total_cmp(&b.parameter_value)
            .then(a.min_gap.total_cmp(&b.min_gap))
    });
    Ok(accepted)
}

/// Vertex `(x, y, a)` of the parabola `a x^2 + b x + c` through three points;
/// `None` unless it opens upward. The vertex is clamped to the bracket.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a > 0.0 && a.is_finite()) {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[1] + (xv - x[1]) * (b + a * (xv + x[1]));
    Some((xv, yv, a))
}

/// Groups crossings whose locations agree within their widths, in order of
/// parameter value; members of a group are sorted by gap.
pub fn group_simultaneous(crossings: &[AvoidedCrossing]) -> Vec<Vec<AvoidedCrossing>> {
    let mut sorted = crossings.to_vec();
    sorted.sort_by(|a, b| a.parameter_value.total_cmp(&b.parameter_value));
    let mut groups: Vec<Vec<AvoidedCrossing>> = Vec::new();
    for c in sorted {
        match groups.last_mut() {
            Some(g)
                if g.iter().any(|m| {
                    (m.parameter_value - c.parameter_value).abs() <= m.width.max(c.width)
                }) =>
            {
                g.push(c)
            }
            _ => groups.push(vec![c]),
        }
    }
    for g in &mut groups {
        g.sort_by(|a, b| a.min_gap.total_cmp(&b.min_gap));
    }
    groups
}
