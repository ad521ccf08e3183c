//! Operators built from scans: split, compress, LSB radix sort, top-k and
//! sampling.
//!
//! All of them go through an [`Operators`] handle, which owns the scan
//! configuration and tallies how many scans and split passes were issued.

mod radix;
mod sampling;
mod split;
mod topk;

pub use radix::{decode_sortable, encode_key, encode_sortable, KeyType};
pub use sampling::{Nucleus, SampleDraw};

use crate::counters::WorkSpanCounters;
use crate::dtype::Storage;
use crate::error::Result;
use crate::scan_kernels::{scan, ScanConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult<T> {
    pub values: Vec<T>,
    /// `values[j] == input[indices[j]]`.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortResult<T> {
    pub values: Vec<T>,
    pub indices: Vec<usize>,
    /// Split passes issued by the sort.
    pub passes: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    pub scan_calls: u64,
    pub split_passes: u64,
    pub counters: WorkSpanCounters,
}

/// Entry point for the scan-based operators.
#[derive(Debug, Clone)]
pub struct Operators {
    cfg: ScanConfig,
    stats: OpStats,
}

impl Operators {
    /// `cfg.strategy` is the scan used for every internal scan; `exclusive`
    /// and `l2_chunk_elems` are overridden per call.
    pub fn new(cfg: ScanConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Operators {
            cfg,
            stats: OpStats::default(),
        })
    }

    pub fn config(&self) -> &ScanConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &OpStats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = OpStats::default();
    }

    fn run_scan<S: Storage>(&mut self, x: &[S], exclusive: bool) -> Result<Vec<S::Acc>> {
        let cfg = self.cfg.clone().with_exclusive(exclusive);
        let out = scan(x, &cfg)?;
        self.stats.scan_calls += 1;
        self.stats.counters = self.stats.counters.then(&out.counters);
        Ok(out.values)
    }

    fn charge(&mut self, counters: &WorkSpanCounters) {
        self.stats.counters = self.stats.counters.then(counters);
    }
}
