//! Batch front end: GEMM accuracy and op-count benchmarks and the
//! Green-function sweep, written as CSV.

pub mod bench;
pub mod green;
pub mod modes;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ozgemm", version, about = "Emulated FP64 GEMM benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Accuracy and backend-GEMM counts of each mode on random square products.
    BenchGemm(BenchArgs),
    /// Resolvent sweep along the contour and the integrated eigenvalue count.
    GreenFn(GreenArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Square matrix sizes.
    #[arg(long = "sizes", alias = "size", value_delimiter = ',', default_values_t = vec![256usize])]
    pub sizes: Vec<usize>,
    /// Comma-separated modes (`native`, `ozaki1:S[:full]`, `ozaki2:M`; a bare
    /// scheme name takes its parameter from the environment). Defaults to the
    /// `GEMM_EMU_*` configuration.
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u64])]
    pub seeds: Vec<u64>,
    /// Complex operands (each product costs four real GEMMs).
    #[arg(long)]
    pub complex: bool,
    /// Write 0 in the wall-time column so the file is reproducible.
    #[arg(long)]
    pub omit_wall_time: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_E_BOTTOM, allow_hyphen_values = true)]
    pub e_bottom: f64,
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_E_FERMI, allow_hyphen_values = true)]
    pub e_fermi: f64,
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_BLOCK)]
    pub block: usize,
    /// Modes to compare with native. Defaults to native plus the `GEMM_EMU_*`
    /// mode when one is set, otherwise the full precision ladder.
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<String>,
    #[arg(long, default_value_t = ozgemm::workload::sweep::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub omit_wall_time: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::BenchGemm(args) => bench::run_bench_gemm(&args),
        Command::GreenFn(args) => green::run_green_fn(&args),
    }
}
