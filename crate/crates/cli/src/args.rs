use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use resnet_core::verify::MODULES;
use resnet_core::walk::DEFAULT_STEP_CAP;

#[derive(Debug, Parser)]
#[command(name = "resnet", version, about = "Effective resistance and spectral tools for weighted networks")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true, env = "RESNET_THREADS")]
    pub threads: Option<usize>,

    /// Directory for CSV side files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free and wired resistance of a pair across a depth schedule.
    Resistance(ResistanceArgs),
    /// Dirichlet gap sequence and spectral measures of grounded truncations.
    Spectral(SpectralArgs),
    /// Torus integrals for the integer lattice.
    Lattice(LatticeArgs),
    /// Escape probabilities, exact and by simulation.
    Walk(WalkArgs),
    /// Runs the invariant suite on the stock fixtures.
    Verify(VerifyArgs),
    /// Emits a network as JSON.
    Generate(GenerateArgs),
}

/// Where the network comes from. Exactly one must be given.
#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// The integer lattice Z^D, exhausted by l1 balls.
    #[arg(long, value_name = "D")]
    pub lattice: Option<usize>,
    /// The rooted binary tree, exhausted by word length.
    #[arg(long)]
    pub tree: bool,
    /// Path on N vertices.
    #[arg(long, value_name = "N")]
    pub path: Option<usize>,
    /// Triangle with unit conductances.
    #[arg(long)]
    pub k3: bool,
    /// Complete graph on N vertices.
    #[arg(long, value_name = "N")]
    pub complete: Option<usize>,
    /// Network JSON file.
    #[arg(long, value_name = "FILE")]
    pub network: Option<PathBuf>,
    /// Family expression such as `lattice:2`, `tree`, `path:5` or `lattice:1*path:3`.
    #[arg(long, value_name = "SPEC")]
    pub family: Option<String>,
}

#[derive(Debug, Args)]
pub struct ResistanceArgs {
    #[command(flatten)]
    pub source: Source,
    /// Vertex labels, e.g. `0,0 1,0` on a lattice or `"" 01` on the tree.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], required = true, allow_hyphen_values = true)]
    pub pair: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub depths: Vec<usize>,
    /// Spectral gap estimate; adds the 2/γ bound to the report.
    #[arg(long, value_name = "GAMMA")]
    pub gap: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("task").required(true).multiple(true).args(["depths", "measure"])))]
pub struct SpectralArgs {
    #[command(flatten)]
    pub source: Source,
    /// Depths for the Dirichlet gap sequence.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    /// Spectral measure of a source, e.g. `--measure delta 0,0`.
    #[arg(long, num_args = 2, value_names = ["KIND", "POINT"], allow_hyphen_values = true)]
    pub measure: Option<Vec<String>>,
    /// Truncation depth for `--measure`.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Ground label for `--measure` on a finite network.
    #[arg(long)]
    pub ground: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Ell2Kind {
    Dipole,
    Monopole,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("op").required(true).args([
    "resistance", "dipole", "monopole", "monopole_energy", "transience", "ell2",
])))]
pub struct LatticeArgs {
    /// Lattice dimension.
    #[arg(long)]
    pub d: usize,
    /// Resistance between two points.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
    pub resistance: Option<Vec<String>>,
    /// Value at Y of the dipole for the pair (0, X).
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
    pub dipole: Option<Vec<String>>,
    /// Value at X of the monopole at the origin.
    #[arg(long, value_name = "X", allow_hyphen_values = true)]
    pub monopole: Option<String>,
    /// Energy of the monopole at the origin.
    #[arg(long)]
    pub monopole_energy: bool,
    /// Recurrence/transience probe.
    #[arg(long)]
    pub transience: bool,
    /// Square-summability probe.
    #[arg(long, value_enum)]
    pub ell2: Option<Ell2Kind>,
    /// Radii for `--ell2`.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub radii: Vec<usize>,
    /// Coarsest grid per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, requires = "grid", default_value_t = 2)]
    pub refinements: usize,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub source: Source,
    /// Start and target labels.
    #[arg(long, num_args = 2, value_names = ["O", "X"], required = true, allow_hyphen_values = true)]
    pub pair: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Depth of the wired truncation for infinite families.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Count arrival at the wired ground as failure.
    #[arg(long)]
    pub absorb_at_ground: bool,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    pub step_cap: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Restrict the suite to one module.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(MODULES))]
    pub module: Option<String>,
    /// Evaluate the Kronecker identity against a perturbed conductance.
    #[arg(long)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Truncation depth for infinite families.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Wire the truncation into a ground vertex.
    #[arg(long)]
    pub wired: bool,
}
