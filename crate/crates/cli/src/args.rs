use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use ladder_core::lattice::BoundaryTopology;
use ladder_core::sweep::{SweepParameter, IM_TOL};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "ladder",
    version,
    about = "Spectra, bands, sweeps, exceptional points and size scaling of circular and Moebius ladder lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues of a finite ladder with parity labels.
    Spectrum(SpectrumArgs),
    /// Bloch bands over k in [0, 2 pi), optionally with the discrete levels.
    Bands(BandsArgs),
    /// Branch-tracked parameter sweep with detected features.
    Sweep(SweepArgs),
    /// PT windows and their exceptional points along a sweep.
    Eps(SweepArgs),
    /// Gap versus ladder size and a power-law fit.
    Scaling(ScalingArgs),
    /// Closed-form low-dimensional models: spiral, pt2x2, huckel, moebius4x4.
    Effective(EffectiveArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Bands(_) => "bands",
            Self::Sweep(_) => "sweep",
            Self::Eps(_) => "eps",
            Self::Scaling(_) => "scaling",
            Self::Effective(_) => "effective",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Self::Spectrum(a) => &a.common,
            Self::Bands(a) => &a.common,
            Self::Sweep(a) | Self::Eps(a) => &a.common,
            Self::Scaling(a) => &a.common,
            Self::Effective(a) => &a.common,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// `key = value` file; flags on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Named parameter set, e.g. fig3e; see the README for the list.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "PATH")]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Output format; inferred from a `.json` output extension, else csv.
    #[arg(long, value_enum)]
    #[serde(skip)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Circular,
    Moebius,
}

impl From<Topology> for BoundaryTopology {
    fn from(t: Topology) -> Self {
        match t {
            Topology::Circular => Self::Circular,
            Topology::Moebius => Self::Moebius,
        }
    }
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct LadderArgs {
    /// Number of unit cells (at least 3).
    #[arg(long)]
    pub n: Option<usize>,
    /// Intra-cell (rung) hopping.
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// Inter-cell (leg) hopping.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Real on-site detuning; eps_a = -eps_b = (delta + i gamma) / 2.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Gain/loss; for the pt2x2 model the real coupling.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = Topology::Circular)]
    pub topology: Topology,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ladder: LadderArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BandsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Number of k points in [0, 2 pi).
    #[arg(long, default_value_t = 256)]
    pub k_points: usize,
    /// Add the discrete levels of the finite ladder (needs --n).
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    pub overlay: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModel {
    Ladder,
    Moebius4x4,
    Pt2x2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Delta,
    Gamma,
    Alpha,
}

impl From<Parameter> for SweepParameter {
    fn from(p: Parameter) -> Self {
        match p {
            Parameter::Delta => Self::Delta,
            Parameter::Gamma => Self::Gamma,
            Parameter::Alpha => Self::Alpha,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = SweepModel::Ladder)]
    pub model: SweepModel,
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Swept parameter; defaults to alpha for moebius4x4 and delta for pt2x2.
    #[arg(long, value_enum)]
    pub parameter: Option<Parameter>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub end: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    /// Real part of alpha when it is not swept (moebius4x4).
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Imaginary offset of alpha (moebius4x4).
    #[arg(long, default_value_t = 0.0)]
    pub alpha_im: f64,
    /// Symmetric coupling (moebius4x4).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Coupling asymmetry (moebius4x4) or imaginary coupling (pt2x2).
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    /// Level energies (pt2x2); a delta sweep sets their difference about the mean.
    #[arg(long, default_value_t = 0.0)]
    pub e1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e2: f64,
    /// Report features with |Re E| <= window only; default 1% of the
    /// ladder bandwidth, all energies for the small models.
    #[arg(long)]
    pub window: Option<f64>,
    /// |Im E| above this counts as complex.
    #[arg(long, default_value_t = IM_TOL)]
    pub im_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Avoided-crossing gap along delta at gamma = 0.
    Hermitian,
    /// PT window width along gamma at delta = 0.
    Pt,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Family::Hermitian)]
    pub family: Family,
    /// Ladder sizes, comma separated.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [50, 100, 200])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Energy window around zero for the selected feature.
    #[arg(long)]
    pub window: Option<f64>,
    /// Parameter value the selected feature group should sit nearest to.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Sweep range of the swept parameter.
    #[arg(long, action = ArgAction::Set, num_args = 2, value_names = ["LO", "HI"])]
    pub range: Option<Vec<f64>>,
    /// Grid density: intervals per unit parameter per unit cell.
    #[arg(long)]
    pub points_per_cell: Option<f64>,
    /// Fit synthetic gaps 3/N instead of measuring; the exponent must be -1.
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    pub self_test: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EffectiveArgs {
    /// One of spiral, pt2x2, huckel, moebius4x4.
    pub model: String,
    #[command(flatten)]
    pub common: Common,
    /// Mode energy (spiral).
    #[arg(long, default_value_t = 0.0)]
    pub e0: f64,
    /// Real and imaginary parts of the scattering rate (spiral).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_rate_im: f64,
    /// Coupling magnitude |V| (spiral).
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    /// Coupling phase (spiral).
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Backscattering asymmetry in [0, 1] (spiral).
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    /// Level energies (pt2x2).
    #[arg(long, default_value_t = 0.0)]
    pub e1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e2: f64,
    /// Real coupling (pt2x2).
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Imaginary coupling (pt2x2) or coupling asymmetry (moebius4x4).
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    /// Sweep the detuning e1 - e2 over [LO, HI] (pt2x2).
    #[arg(long, action = ArgAction::Set, num_args = 2, value_names = ["LO", "HI"])]
    pub sweep_delta: Option<Vec<f64>>,
    /// Chain length (huckel).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// On-site energy (huckel, moebius4x4).
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_im: f64,
    /// Coupling (huckel, moebius4x4).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Sweep the real part of alpha over [LO, HI] (moebius4x4).
    #[arg(long, action = ArgAction::Set, num_args = 2, value_names = ["LO", "HI"])]
    pub sweep_alpha: Option<Vec<f64>>,
    /// Grid points of a sweep.
    #[arg(long, default_value_t = 401)]
    pub steps: usize,
    /// Report features with |Re E| <= window only; default all energies.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, default_value_t = IM_TOL)]
    pub im_tol: f64,
}
