use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kplume::gaussian::GaussianModel;
use kplume::montecarlo::{SimModel, SimulationConfig, DEFAULT_BIN_WIDTH};
use kplume::{DispersionModel, InitialDistribution, KineticsParams};

#[derive(Debug, Parser)]
#[command(name = "kplume", version, about = "Exact and simulated plumes of kinetically adsorbed random walkers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "snake_case")]
pub enum Command {
    /// Occupation-time law f_n(k) of the free state.
    Kinetics(KineticsArgs),
    /// Joint law of the particle position (or Gaussian density samples).
    Pmf(PmfArgs),
    /// Lateral conditional variance curve x -> Var(S_Y | S_X = x).
    Condvar(CondvarArgs),
    /// Monte Carlo particle simulation.
    Mc(McArgs),
    /// Run the invariant and cross-check suite; exit 1 on any failure.
    Verify(VerifyArgs),
    /// Re-run a command from the manifest it wrote.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Simple,
    Ff45,
    Nn,
    Gauss,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Ff45 => "ff45",
            Self::Nn => "nn",
            Self::Gauss => "gauss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KineticsFlags {
    /// Free -> adsorbed probability per step.
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    /// Adsorbed -> free probability per step.
    #[arg(long, default_value_t = 0.9)]
    pub b: f64,
    /// stationary | free | adsorbed | custom:<pf>
    #[arg(long, default_value = "stationary")]
    pub init: InitialDistribution,
    /// Number of time steps.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
}

impl KineticsFlags {
    pub fn params(&self) -> kplume::Result<KineticsParams> {
        KineticsParams::new(self.a, self.b, self.init)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputFlags {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelFlags {
    #[arg(long, value_enum, default_value_t = ModelKind::Simple)]
    pub model: ModelKind,
    /// Horizontal dispersion parameter.
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Vertical dispersion parameter.
    #[arg(long, default_value_t = 0.25)]
    pub beta: f64,
    /// Diagonal-step probability of the nearest-neighbour model.
    #[arg(long, default_value_t = 0.2)]
    pub xi: f64,
}

impl ModelFlags {
    /// The lattice model, or `None` for the Gaussian one.
    pub fn dispersion(&self) -> Option<DispersionModel> {
        match self.model {
            ModelKind::Simple => Some(DispersionModel::SimpleRw {
                alpha: self.alpha,
                beta: self.beta,
            }),
            ModelKind::Ff45 => Some(DispersionModel::FortyFive {
                alpha: self.alpha,
                beta: self.beta,
            }),
            ModelKind::Nn => Some(DispersionModel::NearestNeighbor { xi: self.xi }),
            ModelKind::Gauss => None,
        }
    }

    pub fn gaussian(&self, kinetics: &KineticsFlags) -> kplume::Result<GaussianModel> {
        GaussianModel::new(kinetics.params()?, self.alpha, self.beta, kinetics.n)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KineticsArgs {
    #[command(flatten)]
    pub kinetics: KineticsFlags,
    /// Also report the modes of f_n.
    #[arg(long)]
    pub modes: bool,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PmfArgs {
    #[command(flatten)]
    pub kinetics: KineticsFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Write the x-marginal instead of the joint law.
    #[arg(long)]
    pub marginal: bool,
    /// Gaussian sampling grid spacing.
    #[arg(long, default_value_t = 0.5)]
    pub grid_step: f64,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomFactor {
    /// Multiply by 1 - f_n(0), as in the closed form.
    #[default]
    Keep,
    /// Conditional variance of the continuous part alone.
    Drop,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CondvarArgs {
    #[command(flatten)]
    pub kinetics: KineticsFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Gaussian evaluation grid spacing.
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,
    /// Gaussian model: keep or drop the 1 - f_n(0) prefactor.
    #[arg(long, value_enum, default_value_t = AtomFactor::Keep)]
    pub atom_factor: AtomFactor,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McArgs {
    #[command(flatten)]
    pub kinetics: KineticsFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long, default_value_t = 1_000_000)]
    pub particles: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gaussian x-bin width.
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    #[command(flatten)]
    pub output: OutputFlags,
}

impl McArgs {
    pub fn config(&self) -> kplume::Result<SimulationConfig> {
        let model = match self.model.dispersion() {
            Some(dispersion) => SimModel::Lattice { dispersion },
            None => SimModel::Gaussian {
                alpha: self.model.alpha,
                beta: self.model.beta,
            },
        };
        let config = SimulationConfig {
            model,
            kinetics: self.kinetics.params()?,
            n: self.kinetics.n,
            particles: self.particles,
            seed: self.seed,
            bin_width: self.bin_width,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Run only the named checks (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
    /// Adsorption probability for the reflection-symmetry check.
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    /// Release probability for the reflection-symmetry check.
    #[arg(long, default_value_t = 0.9)]
    pub b: f64,
    /// Perturb one pmf cell by 1e-6 to exercise the checker.
    #[arg(long)]
    pub inject_fault: bool,
    /// Particles for the Monte Carlo concordance check.
    #[arg(long, default_value_t = 1_000_000)]
    pub particles: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report and a manifest into this directory.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub manifest: String,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<String>,
}
