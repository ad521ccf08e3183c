//! Inclusive/exclusive prefix-sum kernels built on the cube and vector engines.
//!
//! | Strategy | Cube work per `s*s` tile | Propagation |
//! |----------|--------------------------|-------------|
//! | [`scan_u`] | `A @ U` | one `adds` per `s`-row |
//! | [`scan_ul1`] | `A @ 1`, `A @ U`, `+= L⁻ @ C₁` | one `adds` per tile |
//! | [`mc_scan`] | as `scan_u`, blocks in parallel | per block, after a barrier |
//! | [`mc_scan_ul1`] | as `scan_ul1`, blocks in parallel | per block, after a barrier |
//! | [`vector_baseline_scan`] | none | column sweep + row `adds` |
//!
//! Outputs are in the wide accumulation dtype.

mod batched;
mod multi;
mod single;
mod tiles;

use std::fmt::{self, Display};
use std::str::FromStr;

pub use batched::{auto_batch_strategy, batched_scan, BatchOutput, BatchStrategy};
pub use multi::{mc_scan, mc_scan_ul1};
pub use single::{scan_u, scan_ul1, vector_baseline_scan};

use crate::counters::WorkSpanCounters;
use crate::dtype::{Scalar, Storage};
use crate::error::{Error, Result};
use crate::exec_model::{default_workers, Executor, ExecutionTrace};
use crate::matrix_engine::MAX_TILE_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    ScanU,
    ScanUL1,
    MCScan,
    MCScanUL1,
    VectorBaseline,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::ScanU,
        Strategy::ScanUL1,
        Strategy::MCScan,
        Strategy::MCScanUL1,
        Strategy::VectorBaseline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ScanU => "scanu",
            Strategy::ScanUL1 => "scanul1",
            Strategy::MCScan => "mcscan",
            Strategy::MCScanUL1 => "mcscanul1",
            Strategy::VectorBaseline => "baseline",
        }
    }
}

impl Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scan strategy '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanConfig {
    /// Tile dimension; a cube tile holds `s*s` elements.
    pub s: usize,
    /// Number of blocks for the multi-core strategies.
    pub blocks: usize,
    pub exclusive: bool,
    /// Serial chunk length; must be a multiple of `s*s`.
    pub l2_chunk_elems: Option<usize>,
    pub strategy: Strategy,
    /// Vector cores per cube core. Affects scheduling accounting only.
    pub vector_ratio: usize,
    /// OS threads used to run blocks.
    pub workers: usize,
    /// Record an [`ExecutionTrace`] for multi-core runs.
    pub trace: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            s: 128,
            blocks: 20,
            exclusive: false,
            l2_chunk_elems: None,
            strategy: Strategy::MCScan,
            vector_ratio: 2,
            workers: 1,
            trace: false,
        }
    }
}

impl ScanConfig {
    pub fn new(strategy: Strategy, s: usize, blocks: usize) -> Self {
        ScanConfig {
            strategy,
            s,
            blocks,
            ..ScanConfig::default()
        }
    }

    pub fn with_exclusive(mut self, exclusive: bool) -> Self {
        self.exclusive = exclusive;
        self
    }

    pub fn with_l2_chunk(mut self, elems: Option<usize>) -> Self {
        self.l2_chunk_elems = elems;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Uses `SCAN_WORKERS` or the machine's available parallelism.
    pub fn with_default_workers(mut self) -> Self {
        self.workers = default_workers();
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_vector_ratio(mut self, ratio: usize) -> Self {
        self.vector_ratio = ratio;
        self
    }

    pub fn tile_elems(&self) -> usize {
        self.s * self.s
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.s > MAX_TILE_DIM {
            return Err(Error::InvalidConfig(format!(
                "s = {} outside [1, {MAX_TILE_DIM}]",
                self.s
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidConfig("blocks must be >= 1".into()));
        }
        if self.vector_ratio == 0 {
            return Err(Error::InvalidConfig("vector_ratio must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        if let Some(c) = self.l2_chunk_elems {
            if c == 0 || c % self.tile_elems() != 0 {
                return Err(Error::InvalidConfig(format!(
                    "l2 chunk of {c} elements is not a positive multiple of s*s = {}",
                    self.tile_elems()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn executor(&self) -> Executor {
        Executor::new(self.workers).with_tracing(self.trace)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput<A> {
    pub values: Vec<A>,
    pub counters: WorkSpanCounters,
    /// Empty unless the config asked for tracing and the strategy is
    /// multi-core.
    pub trace: ExecutionTrace,
}

/// Runs `cfg.strategy`, honouring `l2_chunk_elems` and `exclusive`.
pub fn scan<S: Storage>(x: &[S], cfg: &ScanConfig) -> Result<ScanOutput<S::Acc>> {
    cfg.validate()?;
    let mut out = match cfg.l2_chunk_elems {
        Some(_) => l2_chunked(cfg.strategy, x, cfg)?,
        None => run_strategy(cfg.strategy, x, cfg, <S::Acc as Scalar>::ZERO)?,
    };
    if cfg.exclusive {
        out.values = exclusive_wrap(&out.values);
    }
    Ok(out)
}

pub(crate) fn run_strategy<S: Storage>(
    strategy: Strategy,
    x: &[S],
    cfg: &ScanConfig,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    match strategy {
        Strategy::ScanU => single::scan_u_with_carry(x, cfg, carry),
        Strategy::ScanUL1 => single::scan_ul1_with_carry(x, cfg, carry),
        Strategy::MCScan => multi::mc_scan_with_carry(x, cfg, tiles::CubeStage::U, carry),
        Strategy::MCScanUL1 => multi::mc_scan_with_carry(x, cfg, tiles::CubeStage::UL1, carry),
        Strategy::VectorBaseline => single::vector_baseline_with_carry(x, cfg, carry),
    }
}

/// Shifts an inclusive scan right by one: `[0, y0, y1, ..., y(n-2)]`.
pub fn exclusive_wrap<A: Scalar>(inclusive: &[A]) -> Vec<A> {
    if inclusive.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(inclusive.len());
    out.push(A::ZERO);
    out.extend_from_slice(&inclusive[..inclusive.len() - 1]);
    out
}

/// Scans `x` one chunk of `cfg.l2_chunk_elems` at a time; the last value of
/// each chunk is carried into the next chunk's offsets.
pub fn l2_chunked<S: Storage>(
    strategy: Strategy,
    x: &[S],
    cfg: &ScanConfig,
) -> Result<ScanOutput<S::Acc>> {
    cfg.validate()?;
    let chunk = cfg.l2_chunk_elems.ok_or_else(|| {
        Error::InvalidConfig("l2_chunked requires l2_chunk_elems".into())
    })?;
    let mut values = Vec::with_capacity(x.len());
    let mut counters = WorkSpanCounters::default();
    let mut trace = ExecutionTrace::default();
    let mut carry = <S::Acc as Scalar>::ZERO;
    for part in x.chunks(chunk) {
        let out = run_strategy(strategy, part, cfg, carry)?;
        if let Some(&last) = out.values.last() {
            carry = last;
        }
        values.extend_from_slice(&out.values);
        counters = counters.then(&out.counters);
        trace.append(out.trace);
    }
    Ok(ScanOutput {
        values,
        counters,
        trace,
    })
}
