use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "collapse-oracle",
    version,
    about = "Maximal reliability of collapse-detection experiments"
)]
pub struct Cli {
    /// Seed for every random stream; equal seeds give byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format. Defaults to `table`, or `json` for simulate and lambda.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write machine output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Record wall-clock time in the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Maximal reliability and its bounds for a known state over a grid of priors.
    Rmax(RmaxArgs),
    /// Maximal reliability of a qubit as a function of |ψ₁|².
    Ellipse(EllipseArgs),
    /// Optimal discrimination of two density matrices read from JSON files.
    Helstrom(HelstromArgs),
    /// Monte Carlo run of a collapse experiment with a fixed effect.
    Simulate(SimulateArgs),
    /// Fraction of random states for which an effect beats blind guessing.
    Lambda(LambdaArgs),
    /// Bipartite, joint-basis and subspace collapse scenarios.
    Scenario(ScenarioArgs),
}

#[derive(Args, Debug)]
pub struct RmaxArgs {
    /// Comma-separated weights |ψ_k|², `uniform`, or `@state.json`.
    #[arg(long)]
    pub psi: String,
    /// Dimension for `--psi uniform`.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Prior: a value or `start:stop:step`.
    #[arg(long)]
    pub p: String,
    /// Collapse basis as `@matrix.json` (columns are basis vectors); default standard.
    #[arg(long)]
    pub basis: Option<String>,
    /// Prefix the data with a gnuplot script in comment lines.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Args, Debug)]
pub struct EllipseArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Grid over |ψ₁|² as `start:stop:step`.
    #[arg(long, default_value = "0:1:0.01")]
    pub grid: String,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Args, Debug)]
pub struct HelstromArgs {
    /// Density matrix of the collapsed hypothesis.
    #[arg(long)]
    pub rho1: PathBuf,
    /// Density matrix of the uncollapsed hypothesis.
    #[arg(long)]
    pub rho2: PathBuf,
    #[arg(long)]
    pub p: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    /// Collapse onto a basis of the whole space.
    Basis,
    /// Basis collapse on S of a state on S ⊗ T.
    FactorS,
    /// Basis collapse on T; only S is observed.
    FactorT,
    /// Collapse onto a basis of S ⊗ T.
    Joint,
    /// Collapse onto blocks of consecutive standard basis vectors.
    Blocks,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub psi: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = ScenarioKind::Basis)]
    pub scenario: ScenarioKind,
    #[arg(long)]
    pub dim_s: Option<usize>,
    #[arg(long)]
    pub dim_t: Option<usize>,
    /// Block sizes for `--scenario blocks`, e.g. `2,1`.
    #[arg(long)]
    pub blocks: Option<String>,
    /// Collapse basis as `@matrix.json`; default standard.
    #[arg(long)]
    pub basis: Option<String>,
    /// `blind`, `zero`, `identity`, `optimal`, `complement`, or `@effect.json`.
    #[arg(long, default_value = "optimal")]
    pub effect: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Spectral,
    Complement,
    Mixed,
}

#[derive(Args, Debug)]
pub struct LambdaArgs {
    /// `zero`, `identity`, `blind`, `random`, or `@effect.json`.
    #[arg(long, conflicts_with = "scan")]
    pub effect: Option<String>,
    /// Search random effects over `--p-grid` instead of a single estimate.
    #[arg(long)]
    pub scan: bool,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub p_grid: String,
    #[arg(long, default_value_t = 32)]
    pub n_effects: usize,
    /// How random effects are drawn.
    #[arg(long, value_enum, default_value_t = Strategy::Spectral)]
    pub strategy: Strategy,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// 1: basis collapse on S; 2: basis collapse on T; 3: basis of S ⊗ T; 4: subspaces.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub variant: u8,
    /// Joint state: weights, `uniform`, or `@state.json`.
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub dim_s: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub dim_t: usize,
    #[arg(long)]
    pub p: f64,
    /// Collapse basis of the collapsing factor (or of S ⊗ T for variant 3).
    #[arg(long)]
    pub basis: Option<String>,
    /// Variant 4: block sizes of consecutive standard basis vectors.
    #[arg(long, conflicts_with = "operators")]
    pub blocks: Option<String>,
    /// Variant 4: `@ops.json` holding a JSON array of matrices.
    #[arg(long)]
    pub operators: Option<String>,
    /// Variant 4: operators are positive with Σ P_k² = I rather than projectors.
    #[arg(long, requires = "operators")]
    pub unsharp: bool,
}
