//! Batched scans over equal-length rows.

use super::single::{scan_u_with_carry, scan_ul1_with_carry};
use super::ScanConfig;
use crate::counters::{merge_counters, WorkSpanCounters};
use crate::dtype::{Scalar, Storage};
use crate::error::{Error, Result};
use crate::exec_model::parallel_map;

/// Batch size above which (together with short rows) row-interleaved
/// scheduling wins.
pub const BATCH_CROSSOVER: usize = 18;
/// Row length below which (together with large batches) row-interleaved
/// scheduling wins.
pub const LENGTH_CROSSOVER: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatchStrategy {
    /// `A @ U` per tile; consecutive rows share a cube core and go to
    /// distinct vector cores (`vector_ratio` rows per cube core).
    BatchScanU,
    /// Three-product tile scans; one whole row per AI core.
    BatchScanUL1,
    Auto,
}

pub fn auto_batch_strategy(batch: usize, len: usize) -> BatchStrategy {
    if batch > BATCH_CROSSOVER && len < LENGTH_CROSSOVER {
        BatchStrategy::BatchScanU
    } else {
        BatchStrategy::BatchScanUL1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput<A> {
    pub rows: Vec<Vec<A>>,
    /// The strategy that actually ran (never `Auto`).
    pub strategy: BatchStrategy,
    /// Vector worker index each row was scheduled on.
    pub assignment: Vec<usize>,
    pub counters: WorkSpanCounters,
}

/// Inclusive scan of every row. `cfg.blocks` is the number of AI cores.
pub fn batched_scan<S, R>(
    rows: &[R],
    cfg: &ScanConfig,
    strategy: BatchStrategy,
) -> Result<BatchOutput<S::Acc>>
where
    S: Storage,
    R: AsRef<[S]> + Sync,
{
    cfg.validate()?;
    let len = rows.first().map_or(0, |r| r.as_ref().len());
    if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: bad.as_ref().len(),
        });
    }
    let strategy = match strategy {
        BatchStrategy::Auto => auto_batch_strategy(rows.len(), len),
        other => other,
    };
    let zero = <S::Acc as Scalar>::ZERO;
    let single = cfg.clone().with_workers(1);

    let refs: Vec<&[S]> = rows.iter().map(|r| r.as_ref()).collect();
    let outputs = parallel_map(cfg.workers, refs, &|_, row: &[S]| match strategy {
        BatchStrategy::BatchScanU => scan_u_with_carry(row, &single, zero),
        _ => scan_ul1_with_carry(row, &single, zero),
    });

    let ratio = cfg.vector_ratio;
    let assignment: Vec<usize> = (0..rows.len())
        .map(|r| match strategy {
            BatchStrategy::BatchScanU => ((r / ratio) % cfg.blocks) * ratio + r % ratio,
            _ => r % cfg.blocks,
        })
        .collect();
    let workers = match strategy {
        BatchStrategy::BatchScanU => cfg.blocks * ratio,
        _ => cfg.blocks,
    };

    let mut per_worker = vec![WorkSpanCounters::default(); workers];
    let mut out_rows = Vec::with_capacity(rows.len());
    for (out, &w) in outputs.into_iter().zip(&assignment) {
        let out = out?;
        per_worker[w] = per_worker[w].then(&out.counters);
        out_rows.push(out.values);
    }

    Ok(BatchOutput {
        rows: out_rows,
        strategy,
        assignment,
        counters: merge_counters(&per_worker, 0),
    })
}
