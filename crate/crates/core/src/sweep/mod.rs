//! Parameter sweeps with branch tracking, and the level-crossing diagnostics
//! built on them.

mod crossings;
mod scaling;
mod windows;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effective::{
    moebius4x4_matrix, pt2x2_matrix, Moebius4x4Params, TwoLevelPT, EFFECTIVE_COALESCENCE_TOL,
};
use crate::error::ModelError;
use crate::lattice::{build_hamiltonian, BoundaryTopology, LadderParams};
use crate::linalg::{eigenvalues, sort_spectrum, ComplexMatrix, LinalgError};

pub use crossings::{detect_avoided_crossings, group_simultaneous, AvoidedCrossing};
pub use scaling::{fit_power_law, gap_vs_size, measure_gap, GapScalingFit, ScalingFamily, ScalingSelector};
pub use windows::{
    detect_pt_windows, detect_pt_windows_with, group_nested, EPEstimate, PTWindow,
    WindowOptions,
};

/// Default `|Im|` threshold separating real from complex eigenvalues.
pub const IM_TOL: f64 = 1e-8;
/// Lattice coalescence tolerance, relative to the bandwidth.
pub const LATTICE_COALESCENCE_REL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("eigensolver failed at parameter value {value}: {source}")]
    Solver {
        value: f64,
        #[source]
        source: LinalgError,
    },
    #[error("avoided-crossing analysis needs real branches; |Im| reaches {max_im:e} at parameter value {parameter_value}")]
    WrongRegime { max_im: f64, parameter_value: f64 },
    #[error("no feature selected at size N = {size}")]
    NoFeature { size: usize },
    #[error("scaling fit needs at least 3 sizes, got {0}")]
    TooFewSizes(usize),
    #[error("scaling fit needs positive gaps, got {gap} at N = {size}")]
    NonPositiveGap { size: usize, gap: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Delta,
    Gamma,
    Alpha,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Gamma => "gamma",
            Self::Alpha => "alpha",
        }
    }
}

/// The model family a sweep varies.
///
/// For `TwoLevel`, `Delta` sets the detuning `e1 - e2` about the fixed mean
/// and `Gamma` sets the real coupling. For `Moebius4x4`, `Alpha` sets the
/// real part of `alpha` and keeps its imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelDescriptor {
    Ladder {
        params: LadderParams,
        topology: BoundaryTopology,
    },
    Moebius4x4 {
        params: Moebius4x4Params,
    },
    TwoLevel {
        params: TwoLevelPT,
    },
}

impl ModelDescriptor {
    pub fn matrix_at(&self, parameter: SweepParameter, value: f64) -> Result<ComplexMatrix, SweepError> {
        use SweepParameter::*;
        let m = match (*self, parameter) {
            (Self::Ladder { params, topology }, Delta) => build_hamiltonian(&params.with_delta(value), topology)?,
            (Self::Ladder { params, topology }, Gamma) => build_hamiltonian(&params.with_gamma(value), topology)?,
            (Self::Moebius4x4 { params }, Alpha) => moebius4x4_matrix(&Moebius4x4Params {
                alpha: Complex64::new(value, params.alpha.im),
                ..params
            })?,
            (Self::TwoLevel { params }, Delta) => {
                let mean = (params.e1 + params.e2) / 2.0;
                pt2x2_matrix(&TwoLevelPT {
                    e1: mean + value / 2.0,
                    e2: mean - value / 2.0,
                    ..params
                })?
            }
            (Self::TwoLevel { params }, Gamma) => pt2x2_matrix(&TwoLevelPT {
                gamma_c: value,
                ..params
            })?,
            (model, p) => {
                return Err(SweepError::InvalidSpec(format!(
                    "parameter {} cannot be swept for the {} model",
                    p.name(),
                    model.name()
                )))
            }
        };
        Ok(m)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ladder { topology: BoundaryTopology::Circular, .. } => "circular ladder",
            Self::Ladder { topology: BoundaryTopology::Moebius, .. } => "moebius ladder",
            Self::Moebius4x4 { .. } => "moebius4x4",
            Self::TwoLevel { .. } => "pt2x2",
        }
    }

    /// Energy scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            Self::Ladder { params, .. } => params.bandwidth().max(f64::MIN_POSITIVE),
            _ => 1.0,
        }
    }

    pub fn coalescence_tol(&self) -> f64 {
        match self {
            Self::Ladder { .. } => LATTICE_COALESCENCE_REL * self.scale(),
            _ => EFFECTIVE_COALESCENCE_TOL,
        }
    }

    /// Bisection stops once brackets are this narrow (and the gap is below
    /// the coalescence tolerance).
    pub fn default_resolution(&self) -> f64 {
        match self {
            Self::Ladder { .. } => 1e-9,
            _ => 1e-13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub base: ModelDescriptor,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(SweepError::InvalidSpec("range bounds must be finite".into()));
        }
        if self.start >= self.end {
            return Err(SweepError::InvalidSpec(format!(
                "start {} must be below end {}",
                self.start, self.end
            )));
        }
        if self.steps < 2 {
            return Err(SweepError::InvalidSpec(format!("need at least 2 steps, got {}", self.steps)));
        }
        self.base.matrix_at(self.parameter, self.start)?;
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.steps)
    }

    pub fn spectrum_at(&self, value: f64) -> Result<Vec<Complex64>, SweepError> {
        let m = self.base.matrix_at(self.parameter, value)?;
        eigenvalues(&m).map_err(|source| SweepError::Solver { value, source })
    }
}

/// `steps` equally spaced points with both ends included exactly.
pub fn linspace(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    end
                } else {
                    start + (end - start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Branch-tracked eigenvalue trajectories.
///
/// `branches[b][s]` is branch `b` at step `s`. `matching_cost[s]` is the
/// summed reassignment distance from step `s - 1` (zero at step 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSweep {
    pub parameter_values: Vec<f64>,
    pub branches: Vec<Vec<Complex64>>,
    pub matching_cost: Vec<f64>,
    /// Steps where some branch moved by more than half the mean level
    /// spacing; a finer grid is advisable there.
    pub flagged_steps: Vec<usize>,
    pub coalescence_tol: f64,
    pub scale: f64,
    pub spec: Option<SweepSpec>,
}

impl SpectralSweep {
    pub fn steps(&self) -> usize {
        self.parameter_values.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Branch values at one step, in branch order.
    pub fn step_values(&self, s: usize) -> Vec<Complex64> {
        self.branches.iter().map(|b| b[s]).collect()
    }

    pub fn max_abs_im(&self) -> (f64, usize) {
        let mut worst = (0.0, 0);
        for s in 0..self.steps() {
            for b in &self.branches {
                if b[s].im.abs() > worst.0 {
                    worst = (b[s].im.abs(), s);
                }
            }
        }
        worst
    }

    pub fn needs_refinement(&self) -> bool {
        !self.flagged_steps.is_empty()
    }
}

/// Evaluates the spec on its grid (in parallel) and tracks branches.
pub fn run_sweep(spec: &SweepSpec) -> Result<SpectralSweep, SweepError> {
    spec.validate()?;
    let mut sweep = run_sweep_fn(&spec.values(), |x| spec.spectrum_at(x))?;
    sweep.coalescence_tol = spec.base.coalescence_tol();
    sweep.scale = spec.base.scale();
    sweep.spec = Some(*spec);
    Ok(sweep)
}

/// Sweep over arbitrary spectra, for synthetic or externally built models.
/// Uses the effective-model coalescence tolerance and unit scale.
pub fn run_sweep_fn<F>(values: &[f64], spectrum: F) -> Result<SpectralSweep, SweepError>
where
    F: Fn(f64) -> Result<Vec<Complex64>, SweepError> + Sync,
{
    if values.len() < 2 {
        return Err(SweepError::InvalidSpec(format!("need at least 2 steps, got {}", values.len())));
    }
    let spectra: Vec<Vec<Complex64>> = values
        .par_iter()
        .map(|&x| {
            let mut s = spectrum(x)?;
            sort_spectrum(&mut s);
            Ok(s)
        })
        .collect::<Result<_, SweepError>>()?;
    let width = spectra[0].len();
    if let Some((s, v)) = spectra.iter().enumerate().find(|(_, v)| v.len() != width) {
        return Err(SweepError::InvalidSpec(format!(
            "spectrum size changes from {width} to {} at parameter value {}",
            v.len(),
            values[s]
        )));
    }
    Ok(track_branches(values.to_vec(), spectra))
}

fn track_branches(values: Vec<f64>, spectra: Vec<Vec<Complex64>>) -> SpectralSweep {
    let steps = spectra.len();
    let width = spectra[0].len();
    let mut branches: Vec<Vec<Complex64>> = spectra[0].iter().map(|&z| {
        let mut v = Vec::with_capacity(steps);
        v.push(z);
        v
    }).collect();
    let mut cost = vec![0.0; steps];
    let mut flagged = Vec::new();
    let mut prev: Vec<Complex64> = spectra[0].clone();
    for s in 1..steps {
        let next = &spectra[s];
        let assign = greedy_match(&prev, next);
        let spacing = typical_spacing(next);
        let mut step_cost = 0.0;
        let mut worst: f64 = 0.0;
        for (b, &j) in assign.iter().enumerate() {
            let d = (prev[b] - next[j]).norm();
            step_cost += d;
            worst = worst.max(d);
            branches[b].push(next[j]);
            prev[b] = next[j];
        }
        cost[s] = step_cost;
        if width > 1 && worst > 0.5 * spacing {
            flagged.push(s);
        }
    }
    SpectralSweep {
        parameter_values: values,
        branches,
        matching_cost: cost,
        flagged_steps: flagged,
        coalescence_tol: EFFECTIVE_COALESCENCE_TOL,
        scale: 1.0,
        spec: None,
    }
}

/// Greedy minimal-distance matching: all pairs in order of
/// (distance, branch, value index); `result[b]` is the index into `next`.
fn greedy_match(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let n = prev.len();
    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(n * n);
    for (b, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), b as u32, j as u32));
        }
    }
    pairs.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut left = n;
    for (_, b, j) in pairs {
        let (b, j) = (b as usize, j as usize);
        if out[b] != usize::MAX || taken[j] {
            continue;
        }
        out[b] = j;
        taken[j] = true;
        left -= 1;
        if left == 0 {
            break;
        }
    }
    out
}

/// Mean level spacing: extent of the spectrum over the number of gaps.
fn typical_spacing(values: &[Complex64]) -> f64 {
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let (mut re_lo, mut re_hi, mut im_lo, mut im_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in values {
        re_lo = re_lo.min(z.re);
        re_hi = re_hi.max(z.re);
        im_lo = im_lo.min(z.im);
        im_hi = im_hi.max(z.im);
    }
    ((re_hi - re_lo) + (im_hi - im_lo)) / (values.len() - 1) as f64
}

/// Indices (ascending) of values whose real part lies in `[-window, window]`.
pub fn select_near_zero(values: &[Complex64], energy_window: f64) -> Vec<usize> {
    (0..values.len())
        .filter(|&i| values[i].re.abs() <= energy_window)
        .collect()
}

/// Branches whose real part enters `[-window, window]` at some step.
pub fn select_near_zero_branches(sweep: &SpectralSweep, energy_window: f64) -> Vec<usize> {
    (0..sweep.branch_count())
        .filter(|&b| sweep.branches[b].iter().any(|z| z.re.abs() <= energy_window))
        .collect()
}
