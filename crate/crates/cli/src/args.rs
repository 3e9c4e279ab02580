use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "moran", version, about = "Biparental Moran model with viability selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form limit: (t, y, u, v) over a time grid, or (b, u_level, v_level) over levels
    Theory(TheoryArgs),
    /// One full-model run
    Simulate(SimulateArgs),
    /// Simulated weight trajectories against the limit
    Trajectories(ExperimentArgs),
    /// Weight after a fixed number of steps over a grid of a
    Sweep(ExperimentArgs),
    /// Sup-norm distance to the limit as N grows
    Convergence(ExperimentArgs),
    /// Weight at the hitting time of level b
    Hitting(ExperimentArgs),
    /// Exhaustive small-N checks
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stop {
    /// After --steps steps
    Steps,
    /// When Y first equals floor(bN)
    Level,
    /// When Y is absorbed at 0 or N
    Fixation,
}

/// Options shared by every command that writes a table.
#[derive(Debug, Args)]
pub struct Output {
    /// Flat key = value file; command-line flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long = "t-max", default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Emit the level table for these b instead of the time grid
    #[arg(long = "b-grid", value_delimiter = ',')]
    pub b_grid: Vec<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "steps")]
    pub stop: Stop,
    /// Step count for --stop steps (default 10 N)
    #[arg(long)]
    pub steps: Option<u64>,
    /// Level for --stop level
    #[arg(long)]
    pub b: Option<f64>,
    /// Step budget for --stop level and --stop fixation (default 100 N^2)
    #[arg(long = "max-steps")]
    pub max_steps: Option<u64>,
    /// Record every this many steps (default ceil(N/100))
    #[arg(long)]
    pub stride: Option<u64>,
    /// Write every step to this binary log
    #[arg(long = "step-log", value_name = "PATH")]
    pub step_log: Option<PathBuf>,
    /// Replay the events of a binary log instead of sampling
    #[arg(long, value_name = "PATH")]
    pub replay: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long = "N", value_delimiter = ',', default_value = "1000")]
    pub n: Vec<usize>,
    #[arg(long = "a-grid", visible_alias = "a", value_delimiter = ',', default_value = "0.01")]
    pub a_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub s: Vec<f64>,
    /// Target levels (hitting)
    #[arg(long = "b-grid", visible_alias = "b", value_delimiter = ',', default_value = "0.5")]
    pub b_grid: Vec<f64>,
    /// Rescaled time horizon c (trajectories, convergence)
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Fixed step count n (sweep)
    #[arg(long, default_value_t = 40_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the per-cell summary table to this CSV file
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Negate the limiting drift, to confirm the checks catch it
    #[arg(long = "inject-sign-flip", hide = true)]
    pub inject_sign_flip: bool,
}
