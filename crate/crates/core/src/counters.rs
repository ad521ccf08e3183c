//! Work/span instrumentation.
//!
//! Work is counted per engine instruction. Span is tracked with [`Depth`]
//! stamps: every produced value carries the length of the longest dependence
//! chain that led to it, and an instruction's stamp is one more than the
//! maximum stamp of its inputs. Each matmul and each vector instruction is one
//! unit.

use std::ops::AddAssign;

use serde::Serialize;

/// Dependence-chain depth of a value.
///
/// `units` weighs every engine instruction as one; `propagation` counts only
/// the partial-sum propagation `adds` on the chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Depth {
    pub units: u64,
    pub propagation: u64,
}

impl Depth {
    pub const ZERO: Depth = Depth {
        units: 0,
        propagation: 0,
    };

    /// Component-wise maximum: the stamp of an instruction reading both values.
    pub fn join(self, other: Depth) -> Depth {
        Depth {
            units: self.units.max(other.units),
            propagation: self.propagation.max(other.propagation),
        }
    }

    pub fn after_op(self) -> Depth {
        Depth {
            units: self.units + 1,
            propagation: self.propagation,
        }
    }

    pub fn after_propagation(self) -> Depth {
        Depth {
            units: self.units + 1,
            propagation: self.propagation + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct WorkSpanCounters {
    pub matmul_count: u64,
    pub vector_op_count: u64,
    /// Sum of vector instruction lengths.
    pub vector_elems: u64,
    /// Longest chain of dependent engine instructions.
    pub span_units: u64,
    /// Longest chain of dependent partial-sum propagation `adds`.
    pub propagation_span: u64,
}

impl WorkSpanCounters {
    pub fn record_matmul(&mut self) {
        self.matmul_count += 1;
    }

    pub fn record_vector(&mut self, len: usize) {
        self.vector_op_count += 1;
        self.vector_elems += len as u64;
    }

    /// Raises the span fields to at least `depth`.
    pub fn observe(&mut self, depth: Depth) {
        self.span_units = self.span_units.max(depth.units);
        self.propagation_span = self.propagation_span.max(depth.propagation);
    }

    pub fn depth(&self) -> Depth {
        Depth {
            units: self.span_units,
            propagation: self.propagation_span,
        }
    }

    /// Sequential composition: `next` starts after everything in `self`.
    pub fn then(&self, next: &WorkSpanCounters) -> WorkSpanCounters {
        WorkSpanCounters {
            matmul_count: self.matmul_count + next.matmul_count,
            vector_op_count: self.vector_op_count + next.vector_op_count,
            vector_elems: self.vector_elems + next.vector_elems,
            span_units: self.span_units + next.span_units,
            propagation_span: self.propagation_span + next.propagation_span,
        }
    }

    /// Adds only the work fields of `other`.
    pub fn add_work(&mut self, other: &WorkSpanCounters) {
        self.matmul_count += other.matmul_count;
        self.vector_op_count += other.vector_op_count;
        self.vector_elems += other.vector_elems;
    }

    pub fn total_ops(&self) -> u64 {
        self.matmul_count + self.vector_op_count
    }
}

impl AddAssign<&WorkSpanCounters> for WorkSpanCounters {
    fn add_assign(&mut self, rhs: &WorkSpanCounters) {
        *self = self.then(rhs);
    }
}

/// Merges counters of blocks that ran concurrently.
///
/// Work fields are summed; span is the slowest block plus `cross_units` of
/// sequential work that every block waits on.
pub fn merge_counters(blocks: &[WorkSpanCounters], cross_units: u64) -> WorkSpanCounters {
    if blocks.is_empty() {
        return WorkSpanCounters::default();
    }
    let mut out = WorkSpanCounters::default();
    for b in blocks {
        out.add_work(b);
        out.span_units = out.span_units.max(b.span_units);
        out.propagation_span = out.propagation_span.max(b.propagation_span);
    }
    out.span_units += cross_units;
    out
}
