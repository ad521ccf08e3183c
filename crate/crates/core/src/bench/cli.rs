//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::scan_kernels::Strategy;
use crate::scan_ops::KeyType;

#[derive(Debug, Parser)]
#[command(
    name = "cubescan",
    version,
    about = "Emulated matrix-engine scans and scan-based operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prefix sums over a size sweep.
    Scan(ScanArgs),
    /// Radix sort of 16-bit keys.
    Sort(SortArgs),
    /// Masked select.
    Compress(CompressArgs),
    /// Largest k keys.
    Topk(TopkArgs),
    /// Nucleus sampling against the truncated distribution.
    Topp(ToppArgs),
    /// Weighted sampling against the inverse-CDF oracle.
    Sample(SampleArgs),
    /// Write a random SCN1 array file.
    Gen(GenArgs),
}

impl Command {
    pub fn csv_path(&self) -> Option<&std::path::Path> {
        let out = match self {
            Command::Scan(a) => &a.out,
            Command::Sort(a) => &a.out,
            Command::Compress(a) => &a.out,
            Command::Topk(a) => &a.out,
            Command::Topp(a) => &a.out,
            Command::Sample(a) => &a.out,
            Command::Gen(_) => return None,
        };
        out.csv.as_deref()
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Append CSV rows to this file instead of printing them.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Leave elems_per_sec empty so output is reproducible.
    #[arg(long)]
    pub no_timing: bool,
    /// Compare every result with its oracle.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Tile dimension (1..=128).
    #[arg(long, default_value_t = 128)]
    pub s: usize,
    /// Multi-core block count (AI cores).
    #[arg(long, default_value_t = 20)]
    pub blocks: usize,
    /// Vector cores per cube core.
    #[arg(long, default_value_t = 2)]
    pub vector_ratio: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanDtype {
    F16,
    I8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataDtype {
    F16,
    I8,
    U16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchChoice {
    Auto,
    Scanu,
    Scanul1,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    /// Comma-separated lengths; defaults to powers of two from 2^10 to 2^26.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Element type of generated data (default f16).
    #[arg(long)]
    pub dtype: Option<ScanDtype>,
    #[arg(long)]
    pub exclusive: bool,
    /// Scan in serial chunks of this many elements (a multiple of s*s).
    #[arg(long)]
    pub l2_chunk: Option<usize>,
    /// Scan the array in this SCN1 file instead of generated data.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Scan this many rows of length n with a batched kernel.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, value_enum, default_value = "auto", requires = "batch")]
    pub batch_strategy: BatchChoice,
    /// Write the multi-core execution trace of the last run to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SortArgs {
    #[arg(long, value_delimiter = ',', default_value = "100000", conflicts_with = "input")]
    pub n: Vec<usize>,
    #[arg(long, default_value = "f16")]
    pub dtype: KeyType,
    /// Radix passes (16 for a full sort).
    #[arg(long, default_value_t = 16)]
    pub bits: u32,
    /// Sort the keys in this SCN1 file (f16 or u16) instead.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Scan strategy used inside the operator.
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    #[arg(long, value_delimiter = ',', default_value = "1048576")]
    pub n: Vec<usize>,
    /// Probability that an element is kept.
    #[arg(long, default_value_t = 0.5)]
    pub mask_density: f64,
    #[arg(long, value_enum, default_value = "i8")]
    pub dtype: DataDtype,
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TopkArgs {
    #[arg(long, value_delimiter = ',', default_value = "65536")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value = "f16")]
    pub dtype: KeyType,
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ToppArgs {
    #[arg(long, default_value_t = 1024)]
    pub vocab: usize,
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Standard deviation of the Gaussian logits behind the distribution.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    /// Tile dimension (1..=128).
    #[arg(long, default_value_t = 16)]
    pub s: usize,
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Comma-separated positive weights.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub weights: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Evenly spaced thresholds checked against the inverse-CDF oracle.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value = "mcscan")]
    pub algo: Strategy,
    #[arg(long, default_value_t = 16)]
    pub s: usize,
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "f16")]
    pub dtype: DataDtype,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
