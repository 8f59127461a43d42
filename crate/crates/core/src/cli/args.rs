use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "robust-pandora", version, about = "Minimax-regret search policies for Pandora's box problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem instance.
    Solve(SolveArgs),
    /// Tabulate solutions along a parameter grid.
    Sweep(SweepArgs),
    /// Check the saddle-point conditions numerically.
    Verify(VerifyArgs),
    /// Estimate search counts and regret by simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    Indep,
    Corr,
    CorrIntra,
    Het,
    Interim,
    TwoBox,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Indep => "indep",
            Regime::Corr => "corr",
            Regime::CorrIntra => "corr-intra",
            Regime::Het => "het",
            Regime::Interim => "interim",
            Regime::TwoBox => "two-box",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    N,
    Q,
    Delta,
    Ubar,
}

#[derive(Debug, Clone, Args)]
pub struct Problem {
    #[arg(long, value_enum)]
    pub regime: Regime,
    /// High reward of every box.
    #[arg(long, default_value_t = 1.0)]
    pub ubar: f64,
    /// Search cost per box.
    #[arg(long)]
    pub c: Option<f64>,
    /// Number of boxes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Heterogeneous boxes as "u1:c1,u2:c2,...".
    #[arg(long)]
    pub boxes: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: Problem,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: Problem,
    #[arg(long, value_enum)]
    pub sweep: SweepVar,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Total cost of the two boxes in a delta sweep.
    #[arg(long)]
    pub ctotal: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Gap tolerance; each regime has its own default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Grid resolution; each regime has its own default.
    #[arg(long)]
    pub grid: Option<usize>,
    /// JSON file with a claimed solution {"alpha": [...], "regret": r}.
    #[arg(long)]
    pub policy_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// iid:<q> | needle:<P> | profile:<Q0,...,Qn> | pvec:<p1,...,pm>
    #[arg(long)]
    pub truth: String,
    #[arg(long, default_value_t = 100_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON file with a policy {"alpha": [...]} to simulate instead of the solution.
    #[arg(long)]
    pub policy_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}
