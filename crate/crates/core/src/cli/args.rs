use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "walkrange", version, about = "Exact and Monte Carlo checks of range monotonicity and trapping inequalities")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Master seed for every random draw [default: 1, or the config file's seed].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Force exact rational arithmetic.
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Force floating point arithmetic.
    #[arg(long, global = true)]
    pub float: bool,
    /// Directory for the report and its manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Global {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Exact checks on survival fields and kernels.
    #[command(subcommand)]
    Verify(Verify),
    /// Expected range of the held walk with insertions.
    #[command(subcommand)]
    Range(RangeCmd),
    /// Continuous-time trap field.
    #[command(subcommand)]
    Trap(TrapCmd),
    /// Coordinate coupling of two simple random walks.
    #[command(subcommand)]
    Coupling(CouplingCmd),
    /// Range ratio of the additively perturbed walk against the plain walk.
    Counterexample {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct TrajectoryArgs {
    /// Increment law: srw:D, lazy:D, cube:D, delta:D, uniform3 or file:PATH.
    #[arg(long)]
    pub pmf: String,
    /// Trap trajectory: alternating:N, random:SEED:N or zero:N.
    #[arg(long, conflicts_with = "phi_file")]
    pub phi: Option<String>,
    /// Trap trajectory file, one line of d integers per time step.
    #[arg(long)]
    pub phi_file: Option<PathBuf>,
    /// Horizon N; defaults to the trajectory length minus one.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Paired,
    Moreau,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Verify {
    /// Hit-mass margins against the static trap.
    Pascal(TrajectoryArgs),
    /// Symmetric domination of the survival field at every time (d = 1).
    Domination(TrajectoryArgs),
    /// First-passage decomposition identities.
    Decomposition(TrajectoryArgs),
    /// Recursive lower bound on the hit-mass margin.
    WRecursion(TrajectoryArgs),
    /// Monotonicity conditions on the transition kernels.
    Conditions {
        #[arg(long)]
        pmf: String,
        #[arg(long, default_value_t = 16)]
        horizon: i64,
        #[arg(long, value_enum, default_value_t = ModeArg::Paired)]
        mode: ModeArg,
    },
    /// `p_n(x) <= p_n(e_1)` for odd `n` and odd `|x|_1`.
    Pnxodd {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        /// Sup-norm radius of the checked sites; defaults to n.
        #[arg(long)]
        radius: Option<i64>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct RangeArgs {
    #[arg(long)]
    pub pmf: String,
    /// Insertion path: zero:N or random:SEED:N.
    #[arg(long, conflicts_with = "f_file")]
    pub f: Option<String>,
    /// Insertion path file, one line of d integers per time step.
    #[arg(long)]
    pub f_file: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum RangeCmd {
    /// Exact value through the two-trap hit mass, for every horizon up to n.
    Exact(RangeArgs),
    /// Sample mean and standard error.
    Mc {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
    },
    /// Exact value by enumerating every path.
    Enumerate(RangeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TrapArgs {
    /// TOML configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured replica count.
    #[arg(long)]
    pub reps: Option<u64>,
    /// Overrides the configured window radius.
    #[arg(long)]
    pub window: Option<i64>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum TrapCmd {
    /// Direct simulation against the particle and the fixed origin.
    Simulate(TrapArgs),
    /// Exponential identity over single-trap hitting probabilities.
    Identity(TrapArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum CouplingCmd {
    /// Seeded replicas with invariant checks at every step.
    Run {
        /// Start of X, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<i64>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
    },
    /// Every driving sequence of length n.
    Oracle {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<i64>,
        #[arg(long)]
        n: usize,
    },
}
