//! Logical accelerator model: block partitioning, barrier-separated phases
//! and execution traces.
//!
//! Blocks are mapped onto OS threads, but every result is collected in block
//! order and each block writes a disjoint output range, so outputs and
//! counters never depend on the worker count.

use std::fmt::{self, Display, Write as _};
use std::ops::Range;

use crate::counters::WorkSpanCounters;
use crate::error::{Error, Result};

pub const WORKERS_ENV: &str = "SCAN_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreTopology {
    pub ai_cores: usize,
    /// Vector cores per cube core.
    pub vector_ratio: usize,
}

impl Default for CoreTopology {
    fn default() -> Self {
        CoreTopology {
            ai_cores: 20,
            vector_ratio: 2,
        }
    }
}

impl CoreTopology {
    pub fn new(ai_cores: usize, vector_ratio: usize) -> Result<Self> {
        if ai_cores == 0 || vector_ratio == 0 {
            return Err(Error::InvalidConfig(format!(
                "topology needs ai_cores >= 1 and vector_ratio >= 1, got {ai_cores} and {vector_ratio}"
            )));
        }
        Ok(CoreTopology {
            ai_cores,
            vector_ratio,
        })
    }

    pub fn vector_cores(&self) -> usize {
        self.ai_cores * self.vector_ratio
    }
}

/// Contiguous half-open index ranges, one per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    ranges: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Splits `data` into one mutable slice per block.
    pub fn split_mut<'a, T>(&self, mut data: &'a mut [T]) -> Vec<&'a mut [T]> {
        let mut out = Vec::with_capacity(self.ranges.len());
        for r in &self.ranges {
            let (head, tail) = data.split_at_mut(r.len());
            out.push(head);
            data = tail;
        }
        out
    }
}

/// Splits `[0, n)` into `blocks` ranges of whole `s*s` tiles whose tile counts
/// differ by at most one, larger blocks first. Only the range holding the
/// final element may end in a partial tile.
pub fn partition_blocks(n: usize, blocks: usize, s: usize) -> Result<BlockPartition> {
    if blocks == 0 || s == 0 {
        return Err(Error::InvalidConfig(format!(
            "partition needs blocks >= 1 and s >= 1, got {blocks} and {s}"
        )));
    }
    let tile = s * s;
    let tiles = n.div_ceil(tile);
    let base = tiles / blocks;
    let extra = tiles % blocks;
    let mut ranges = Vec::with_capacity(blocks);
    let mut start = 0;
    for b in 0..blocks {
        let count = base + usize::from(b < extra);
        let end = (start + count * tile).min(n);
        ranges.push(start..end);
        start = end;
    }
    Ok(BlockPartition { ranges })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Cube,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Matmul,
    ReduceSum,
    Adds,
    Gather,
}

impl Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::One => "I",
            Phase::Two => "II",
        })
    }
}

impl Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Cube => "cube",
            Engine::Vector => "vector",
        })
    }
}

impl Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Matmul => "matmul",
            OpKind::ReduceSum => "reduce_sum",
            OpKind::Adds => "adds",
            OpKind::Gather => "gather_mask",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub block: usize,
    pub phase: Phase,
    pub engine: Engine,
    pub op: OpKind,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEntry {
    Event(TraceEvent),
    Barrier,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecutionTrace {
    entries: Vec<TraceEntry>,
}

impl ExecutionTrace {
    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn barrier_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, TraceEntry::Barrier))
            .count()
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.entries.iter().filter_map(|e| match e {
            TraceEntry::Event(ev) => Some(ev),
            TraceEntry::Barrier => None,
        })
    }

    pub fn append(&mut self, other: ExecutionTrace) {
        self.entries.extend(other.entries);
    }

    /// Checks that every Phase II event is preceded by a barrier with no
    /// Phase I event in between.
    pub fn validate(&self) -> Result<()> {
        let mut after_barrier = false;
        for (i, entry) in self.entries.iter().enumerate() {
            match entry {
                TraceEntry::Barrier => after_barrier = true,
                TraceEntry::Event(ev) if ev.phase == Phase::One => after_barrier = false,
                TraceEntry::Event(ev) => {
                    if !after_barrier {
                        return Err(Error::InvalidArgument(format!(
                            "trace entry {i}: block {} phase II event before barrier",
                            ev.block
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// One line per entry: `block<TAB>phase<TAB>engine<TAB>op<TAB>start..end`,
    /// or `barrier`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            match entry {
                TraceEntry::Barrier => out.push_str("barrier\n"),
                TraceEntry::Event(ev) => {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}..{}",
                        ev.block, ev.phase, ev.engine, ev.op, ev.range.start, ev.range.end
                    );
                }
            }
        }
        out
    }
}

/// Per-block state handed to phase closures.
#[derive(Debug)]
pub struct BlockCtx {
    pub index: usize,
    pub phase: Phase,
    pub counters: WorkSpanCounters,
    tracing: bool,
    events: Vec<TraceEvent>,
}

impl BlockCtx {
    fn new(index: usize, phase: Phase, tracing: bool) -> Self {
        BlockCtx {
            index,
            phase,
            counters: WorkSpanCounters::default(),
            tracing,
            events: Vec::new(),
        }
    }

    pub fn record(&mut self, engine: Engine, op: OpKind, range: Range<usize>) {
        if self.tracing {
            self.events.push(TraceEvent {
                block: self.index,
                phase: self.phase,
                engine,
                op,
                range,
            });
        }
    }
}

/// Results of a two-phase run, all in block order.
#[derive(Debug)]
pub struct BarrierRun<R1, R2> {
    pub phase1: Vec<R1>,
    pub phase2: Vec<R2>,
    pub phase1_counters: Vec<WorkSpanCounters>,
    pub phase2_counters: Vec<WorkSpanCounters>,
    pub trace: ExecutionTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Executor {
    workers: usize,
    tracing: bool,
}

impl Default for Executor {
    fn default() -> Self {
        Executor::new(1)
    }
}

impl Executor {
    pub fn new(workers: usize) -> Self {
        Executor {
            workers: workers.max(1),
            tracing: false,
        }
    }

    pub fn with_tracing(mut self, tracing: bool) -> Self {
        self.tracing = tracing;
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `phase1` on every block, waits for all of them, then runs
    /// `phase2` on every block with the full list of Phase I results.
    ///
    /// The first failing block (lowest index) aborts the run.
    pub fn run_with_barrier<A, R1, R2, F1, F2>(
        &self,
        chunks: Vec<&mut [A]>,
        phase1: F1,
        phase2: F2,
    ) -> Result<BarrierRun<R1, R2>>
    where
        A: Send,
        R1: Send + Sync,
        R2: Send,
        F1: Fn(&mut BlockCtx, &mut [A]) -> Result<R1> + Sync,
        F2: Fn(&mut BlockCtx, &mut [A], &[R1]) -> Result<R2> + Sync,
    {
        let tracing = self.tracing;
        let mut trace = ExecutionTrace::default();

        let first = parallel_map(self.workers, chunks, &|i, chunk: &mut [A]| {
            let mut ctx = BlockCtx::new(i, Phase::One, tracing);
            let r = phase1(&mut ctx, chunk);
            (r, ctx, chunk)
        });
        let mut phase1_out = Vec::with_capacity(first.len());
        let mut phase1_counters = Vec::with_capacity(first.len());
        let mut chunks = Vec::with_capacity(first.len());
        for (i, (r, ctx, chunk)) in first.into_iter().enumerate() {
            let r = r.map_err(|e| Error::BlockFailed {
                block: i,
                source: Box::new(e),
            })?;
            phase1_out.push(r);
            phase1_counters.push(ctx.counters);
            trace
                .entries
                .extend(ctx.events.into_iter().map(TraceEntry::Event));
            chunks.push(chunk);
        }

        trace.entries.push(TraceEntry::Barrier);

        let reductions = &phase1_out;
        let second = parallel_map(self.workers, chunks, &|i, chunk: &mut [A]| {
            let mut ctx = BlockCtx::new(i, Phase::Two, tracing);
            let r = phase2(&mut ctx, chunk, reductions);
            (r, ctx)
        });
        let mut phase2_out = Vec::with_capacity(second.len());
        let mut phase2_counters = Vec::with_capacity(second.len());
        for (i, (r, ctx)) in second.into_iter().enumerate() {
            let r = r.map_err(|e| Error::BlockFailed {
                block: i,
                source: Box::new(e),
            })?;
            phase2_out.push(r);
            phase2_counters.push(ctx.counters);
            trace
                .entries
                .extend(ctx.events.into_iter().map(TraceEntry::Event));
        }

        Ok(BarrierRun {
            phase1: phase1_out,
            phase2: phase2_out,
            phase1_counters,
            phase2_counters,
            trace,
        })
    }
}

/// Worker count from `SCAN_WORKERS`, falling back to available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Maps `f` over `items` on up to `workers` scoped threads. Each thread takes
/// a contiguous run of items; results come back in item order.
pub fn parallel_map<T, R, F>(workers: usize, items: Vec<T>, f: &F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, T) -> R + Sync,
{
    let n = items.len();
    if workers <= 1 || n <= 1 {
        return items.into_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let per = n.div_ceil(workers.min(n));
    let mut groups: Vec<Vec<(usize, T)>> = Vec::new();
    let mut iter = items.into_iter().enumerate().peekable();
    while iter.peek().is_some() {
        groups.push(iter.by_ref().take(per).collect());
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = groups
            .into_iter()
            .map(|group| {
                scope.spawn(move || {
                    group
                        .into_iter()
                        .map(|(i, t)| f(i, t))
                        .collect::<Vec<R>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| match h.join() {
                Ok(v) => v,
                Err(payload) => std::panic::resume_unwind(payload),
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiles(p: &BlockPartition, s: usize) -> Vec<usize> {
        p.ranges().iter().map(|r| r.len().div_ceil(s * s)).collect()
    }

    #[test]
    fn partition_even_split() {
        let s = 4;
        let p = partition_blocks(4 * s * s, 2, s).unwrap();
        assert_eq!(p.ranges(), &[0..32, 32..64]);
    }

    #[test]
    fn partition_small_input() {
        let s = 8;
        let p = partition_blocks(s * s, 20, s).unwrap();
        assert_eq!(p.len(), 20);
        assert_eq!(p.ranges()[0], 0..64);
        assert!(p.ranges()[1..].iter().all(|r| r.is_empty()));
    }

    #[test]
    fn partition_uneven_split() {
        let s = 4;
        let p = partition_blocks(5 * s * s, 2, s).unwrap();
        assert_eq!(tiles(&p, s), [3, 2]);
    }

    #[test]
    fn partition_partial_tile_and_balance() {
        let s = 4;
        let n = 7 * s * s + 3;
        let p = partition_blocks(n, 3, s).unwrap();
        assert_eq!(tiles(&p, s), [3, 3, 2]);
        assert_eq!(p.ranges().last().unwrap().end, n);
        assert_eq!(p.ranges()[2].len(), s * s + 3);
    }

    #[test]
    fn partition_rejects_zero_blocks() {
        assert!(partition_blocks(10, 0, 4).is_err());
    }

    #[test]
    fn barrier_run_structure() {
        let mut data = vec![1u32; 8];
        let p = partition_blocks(8, 2, 2).unwrap();
        let exec = Executor::new(2).with_tracing(true);
        let run = exec
            .run_with_barrier(
                p.split_mut(&mut data),
                |ctx, chunk| {
                    ctx.record(Engine::Vector, OpKind::ReduceSum, 0..chunk.len());
                    Ok(chunk.iter().sum::<u32>())
                },
                |ctx, chunk, sums| {
                    ctx.record(Engine::Vector, OpKind::Adds, 0..chunk.len());
                    let offset: u32 = sums[..ctx.index].iter().sum();
                    chunk.iter_mut().for_each(|v| *v += offset);
                    Ok(())
                },
            )
            .unwrap();
        assert_eq!(run.phase1, [4, 4]);
        assert_eq!(data, [1, 1, 1, 1, 5, 5, 5, 5]);
        let e = run.trace.entries();
        assert_eq!(e.len(), 5);
        assert_eq!(e[2], TraceEntry::Barrier);
        run.trace.validate().unwrap();
        assert_eq!(run.trace.to_text().lines().nth(2), Some("barrier"));
        assert_eq!(
            run.trace.to_text().lines().next(),
            Some("0\tI\tvector\treduce_sum\t0..4")
        );
    }

    #[test]
    fn empty_run_has_single_barrier() {
        let mut data: Vec<u8> = vec![];
        let p = partition_blocks(0, 3, 2).unwrap();
        let run = Executor::new(1)
            .with_tracing(true)
            .run_with_barrier(p.split_mut(&mut data), |_, _| Ok(()), |_, _, _: &[()]| Ok(()))
            .unwrap();
        assert_eq!(run.trace.entries(), &[TraceEntry::Barrier]);
    }

    #[test]
    fn failing_block_reports_index() {
        let mut data = vec![0u8; 6];
        let p = partition_blocks(6, 3, 1).unwrap();
        let err = Executor::new(3)
            .run_with_barrier(
                p.split_mut(&mut data),
                |ctx, _| {
                    if ctx.index == 1 {
                        Err(Error::InvalidArgument("boom".into()))
                    } else {
                        Ok(())
                    }
                },
                |_, _, _: &[()]| Ok(()),
            )
            .unwrap_err();
        assert!(matches!(err, Error::BlockFailed { block: 1, .. }));
    }

    #[test]
    fn validate_rejects_phase_two_before_barrier() {
        let trace = ExecutionTrace {
            entries: vec![TraceEntry::Event(TraceEvent {
                block: 0,
                phase: Phase::Two,
                engine: Engine::Vector,
                op: OpKind::Adds,
                range: 0..1,
            })],
        };
        assert!(trace.validate().is_err());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        for workers in [1, 4, 20, 64] {
            let out = parallel_map(workers, items.clone(), &|i, v| (i, v * 2));
            assert!(out.iter().enumerate().all(|(k, &(i, v))| k == i && v == 2 * k));
        }
    }

    #[test]
    fn topology_validation() {
        assert!(CoreTopology::new(0, 2).is_err());
        assert_eq!(CoreTopology::default().vector_cores(), 40);
    }
}
