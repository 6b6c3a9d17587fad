use clap::{Args, Parser, Subcommand, ValueEnum};

use backflow_core::{DefectKind, DefectSpec, GaussianTest, GridSpec, Result};

#[derive(Parser, Debug)]
#[command(name = "backflow", version, about = "Lowest eigenvalue of the smeared probability-current operator with point defects")]
pub struct Cli {
    /// Worker threads (1 forces serial execution).
    #[arg(long, global = true, env = "BACKFLOW_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// β and eigen-residual for one configuration.
    Beta(BetaArgs),
    /// Sweep β over x0 and strength, from a preset or explicit lists.
    Scan(ScanArgs),
    /// Run the invariant suites.
    Validate(ValidateArgs),
    /// Check the defect conservation laws on random mode superpositions.
    Conservation(ConservationArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DefectArg {
    Free,
    Delta,
    Jump,
}

impl From<DefectArg> for DefectKind {
    fn from(d: DefectArg) -> Self {
        match d {
            DefectArg::Free => DefectKind::Free,
            DefectArg::Delta => DefectKind::Delta,
            DefectArg::Jump => DefectKind::Jump,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct DefectArgs {
    #[arg(long, value_enum, default_value = "free")]
    pub defect: DefectArg,
    /// λ for delta, α for jump.
    #[arg(long, allow_negative_numbers = true)]
    pub strength: Option<f64>,
    /// Add the conserved-current term (jump only).
    #[arg(long)]
    pub conserved: bool,
}

impl DefectArgs {
    pub fn spec(&self) -> Result<DefectSpec> {
        DefectSpec::new(self.defect.into(), self.strength, self.conserved)
    }
}

#[derive(Args, Debug)]
pub struct TestArgs {
    /// Centre of the Gaussian averaging function.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Support half-width in units of σ.
    #[arg(long, default_value_t = 8.0)]
    pub support_factor: f64,
}

impl TestArgs {
    pub fn spec(&self) -> Result<GaussianTest> {
        GaussianTest::with_support_factor(self.x0, self.sigma, self.support_factor)
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Number of momentum cells.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Momentum cutoff.
    #[arg(long, default_value_t = 200.0)]
    pub pcut: f64,
}

impl GridArgs {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.pcut)
    }
}

#[derive(Args, Debug)]
pub struct BetaArgs {
    #[command(flatten)]
    pub defect: DefectArgs,
    #[command(flatten)]
    pub test: TestArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Named figure sweep; see the list below.
    #[arg(long)]
    pub preset: Option<String>,
    /// Defect family for an explicit sweep.
    #[arg(long, value_enum)]
    pub defect: Option<DefectArg>,
    /// Comma-separated strengths for an explicit sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strengths: Option<Vec<f64>>,
    #[arg(long)]
    pub conserved: bool,
    /// Comma-separated x0 values; defaults to 81 points on the family's window.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 8.0)]
    pub support_factor: f64,
    /// Override the grid (defaults: preset grid, else 2000).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub pcut: Option<f64>,
    /// Landscape presets at n = 2000, p = 200 instead of the reduced grid.
    #[arg(long)]
    pub full_resolution: bool,
    /// Write wall_s as 0 so that repeated runs give identical files.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: std::path::PathBuf,
    /// Defaults to the extension of --out.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Run only the named suite (repeatable).
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_hermiticity_fault: bool,
}

#[derive(Args, Debug)]
pub struct ConservationArgs {
    #[command(flatten)]
    pub defect: DefectArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random superpositions per check.
    #[arg(long, default_value_t = 100)]
    pub states: usize,
}
