//! Command-line benchmarking and verification.
//!
//! Every command produces [`BenchRecord`] rows written as CSV. Throughput is
//! the wall-clock rate of the software emulation, not a hardware figure.

pub mod cli;
mod commands;
pub mod data;
pub mod oracle;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cli::{Cli, Command};

use crate::error::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CSV_HEADER: [&str; 10] = [
    "algo",
    "n",
    "s",
    "blocks",
    "dtype",
    "elems_per_sec",
    "matmuls",
    "vector_ops",
    "span_units",
    "verified",
];

/// One measured run. `verified` is true only when the output was checked
/// against its oracle and passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algo: String,
    pub n: u64,
    pub s: u64,
    pub blocks: u64,
    pub dtype: String,
    /// Emulation throughput; empty when timing is disabled.
    pub elems_per_sec: Option<f64>,
    pub matmuls: u64,
    pub vector_ops: u64,
    pub span_units: u64,
    pub verified: bool,
}

/// Records produced by one command and whether any requested check failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub records: Vec<BenchRecord>,
    pub failed_checks: usize,
}

/// Writes `records` as CSV. A path is appended to, with the header written
/// only when the file is new or empty; without a path the CSV goes to
/// stdout.
pub fn write_records(records: &[BenchRecord], csv_path: Option<&Path>) -> Result<()> {
    match csv_path {
        Some(path) => {
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            let fresh = file.metadata()?.len() == 0;
            write_csv(file, records, fresh)
        }
        None => write_csv(std::io::stdout().lock(), records, true),
    }
}

fn write_csv<W: Write>(out: W, records: &[BenchRecord], header: bool) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        writer.write_record(CSV_HEADER)?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let records = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(records)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match commands::dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if !matches!(cli.command, Command::Gen(_)) {
        if let Err(e) = write_records(&outcome.records, cli.command.csv_path()) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if outcome.failed_checks > 0 {
        eprintln!("verification failed in {} check(s)", outcome.failed_checks);
        return EXIT_VERIFY_FAILED;
    }
    EXIT_OK
}
