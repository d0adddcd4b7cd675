use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Format;

/// Workbench for tree Ising models observed at their leaves.
#[derive(Debug, Clone, Parser)]
#[command(name = "latent-ising", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Failure probability; 0.05 when omitted.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, value_name = "PATH")]
    pub samples: Option<PathBuf>,
    /// Newick model or topology.
    #[arg(long, global = true, value_name = "PATH")]
    pub tree: Option<PathBuf>,
    /// Where to write the command's artifact.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Random weighted binary tree on leaves 1..=n.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = -0.9, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Draw leaf samples from the model in --tree into --out.
    Sample {
        #[arg(long)]
        m: usize,
    },
    /// Empirical correlations and their Hoeffding radius.
    Estimate,
    /// Fit weights to the topology in --tree.
    LearnKnown,
    /// Reconstruct a forest and fit each component.
    LearnUnknown,
    /// Test the samples against the reference model in --tree.
    TestIdentity,
    /// Exact total variation distance between two models.
    EvalTv { a: PathBuf, b: PathBuf },
    /// Move SOURCE towards the topology of TARGET one quartet batch at a time.
    Interpolate { source: PathBuf, target: PathBuf },
    /// Known-topology learning error over a sweep of m or n.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    M,
    N,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Sweep::M)]
    pub sweep: Sweep,
    /// Comma-separated values of the swept quantity.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
    /// Leaf count when sweeping m.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Sample count when sweeping n.
    #[arg(long, default_value_t = 100_000)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = -0.9, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub hi: f64,
}
