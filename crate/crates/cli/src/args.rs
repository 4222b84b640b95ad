use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "leakwise",
    version,
    about = "Entropy-based leakage analysis for sum and average computations",
    after_help = "Environment: LEAKWISE_THREADS caps the worker pool size.\n\
                  A JSON file given with --config supplies the subcommand and its flags."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for Monte Carlo checks
    #[arg(long, default_value_t = 42, global = true)]
    pub seed: u64,

    /// Poisson tabulation threshold
    #[arg(long, default_value_t = leakwise::DEFAULT_TRUNCATION, global = true)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy and loss after one execution, swept over spectator counts
    Single(SingleArgs),
    /// Remaining entropy after two executions with normal inputs
    TwoExec(TwoExecArgs),
    /// Fewest spectators keeping the relative loss within a budget
    Solve(SolveArgs),
    /// Check closed forms against brute-force enumeration or Monte Carlo
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SingleArgs {
    /// Input distribution, e.g. `poisson:lambda=4`; repeat for a matrix
    #[arg(long, required = true)]
    pub dist: Vec<String>,

    /// Target counts, e.g. `1`, `1..4` or `1,2,8`
    #[arg(long, default_value = "1")]
    pub targets: String,

    /// Spectator counts, same syntax as --targets
    #[arg(long, default_value = "1..32")]
    pub spectators: String,
}

#[derive(Debug, Args)]
pub struct TwoExecArgs {
    /// Per-party variance
    #[arg(long, default_value_t = 4.0)]
    pub sigma2: f64,

    /// Target counts
    #[arg(long, default_value = "1")]
    pub targets: String,

    /// Spectators per execution; sweeps the overlap from 0 to 100%
    #[arg(long, conflicts_with_all = ["s0", "s1", "s2"])]
    pub spectators_per_exec: Option<String>,

    /// Spectators in both executions
    #[arg(long, requires_all = ["s1", "s2"])]
    pub s0: Option<u64>,

    /// Spectators in the first execution only
    #[arg(long, requires_all = ["s0", "s2"])]
    pub s1: Option<u64>,

    /// Spectators in the second execution only
    #[arg(long, requires_all = ["s0", "s1"])]
    pub s2: Option<u64>,

    /// Whether the target joins the second execution
    #[arg(long, value_enum, default_value_t = ParticipationArg::Both)]
    pub participation: ParticipationArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParticipationArg {
    Twice,
    Once,
    Both,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Input distribution; repeat for a matrix
    #[arg(long, required = true)]
    pub dist: Vec<String>,

    /// Target counts
    #[arg(long, default_value = "1")]
    pub targets: String,

    /// Largest acceptable relative loss, in (0, 1)
    #[arg(long)]
    pub budget: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// `uniform:N=16,a=1,t=1,s=1` or `poisson:lambda=4,a=1,t=1,s=1` for
    /// enumeration, `normal:sigma2=4,t=1,s0=2,s1=2,s2=2,p=twice` for Monte Carlo
    #[arg(long, required = true)]
    pub scenario: Vec<String>,

    /// Monte Carlo sample count
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}
