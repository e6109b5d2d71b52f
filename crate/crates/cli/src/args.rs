use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qslab", version, about = "Reduced-model experiments for bar and dipole states on the 2D torus")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Any of them may also be given in the
/// `--config` file as `key=value` (key spelled like the flag, without dashes).
#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Line-based `key=value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Viscosity (ν₀ for `perturb`).
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Aspect ratio of the torus.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Perturbation size ε.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Sign of δ − 1 in the expansion (+1 or -1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps0: Option<f64>,
    /// Time-scaling exponent α (> 1/2).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Final time (τ for `perturb`).
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Fixed step size.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Seed for generated initial data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Explicit initial data as comma-separated reals.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "v1,v2,...")]
    pub init: Option<String>,
    /// CSV output path.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Exit with status 4 when a certificate fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Growth allowance η for the asymmetric constants (default 2|δ²−1|).
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Upper cap on R(0) (or U(0)) accepted by the ratio certificates.
    #[arg(long, global = true)]
    pub cap: Option<f64>,
    /// Dipole ratio r labelling a stable manifold.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Spectral truncation K.
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one model and write its trajectory as CSV.
    Simulate {
        #[arg(long, value_enum, default_value_t = ModelKind::Reduced)]
        model: ModelKind,
    },
    /// Run decay certificates on a reduced-model trajectory.
    Certify {
        #[arg(value_enum)]
        kind: CertKind,
    },
    /// Residual order of the quadratic stable-manifold graph along sample directions.
    ManifoldResidual,
    /// Slow-fast expansion near δ = 1.
    Perturb {
        #[arg(value_enum)]
        action: PerturbAction,
    },
    /// Run a named preset.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Reduced,
    Observable,
    Scaled,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CertKind {
    Symmetric,
    Asymmetric,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbAction {
    Compare,
    Sweep,
    CriticalTimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    #[value(name = "figAB")]
    FigAb,
    #[value(name = "figR")]
    FigR,
    #[value(name = "figLogA")]
    FigLogA,
    #[value(name = "figLogB")]
    FigLogB,
}

impl PresetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::FigAb => "figAB",
            PresetName::FigR => "figR",
            PresetName::FigLogA => "figLogA",
            PresetName::FigLogB => "figLogB",
        }
    }
}
