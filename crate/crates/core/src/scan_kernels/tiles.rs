//! Per-tile building blocks shared by the single- and multi-core kernels.

use crate::counters::{Depth, WorkSpanCounters};
use crate::dtype::{Scalar, Storage};
use crate::error::Result;
use crate::matrix_engine::{make_constant, matmul, tile_view, AccumulatorTile, ConstantKind, TileMatrix};
use crate::vector_engine::adds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CubeStage {
    /// `C = A @ U`: local scans of each `s`-row.
    U,
    /// `C1 = A @ 1; C2 = A @ U; C2 += L⁻ @ C1`: a full local scan of the tile.
    UL1,
}

impl CubeStage {
    /// Depth of a tile's cube result, counted from the tile load.
    pub(crate) fn depth(self) -> Depth {
        match self {
            CubeStage::U => Depth::ZERO.after_op(),
            // C1 and A@U are independent; the accumulate reads both.
            CubeStage::UL1 => Depth::ZERO.after_op().after_op(),
        }
    }
}

/// Constant operands resident for the whole kernel.
pub(crate) struct Constants<S: Storage> {
    s: usize,
    upper: TileMatrix<S>,
    ones: TileMatrix<S>,
    strict_lower: TileMatrix<S::Acc>,
}

impl<S: Storage> Constants<S> {
    pub(crate) fn new(s: usize) -> Result<Self> {
        Ok(Constants {
            s,
            upper: make_constant(ConstantKind::UpperOnes, s)?,
            ones: make_constant(ConstantKind::AllOnes, s)?,
            strict_lower: make_constant(ConstantKind::StrictLowerOnes, s)?,
        })
    }

    /// Runs the cube stage on one (possibly partial) tile and returns the
    /// padded `s*s` accumulator contents.
    pub(crate) fn cube_tile(
        &self,
        stage: CubeStage,
        segment: &[S],
        counters: &mut WorkSpanCounters,
    ) -> Result<Vec<S::Acc>> {
        let a = tile_view(segment, self.s)?;
        match stage {
            CubeStage::U => {
                let mut c = AccumulatorTile::zeros(self.s)?;
                matmul(&a, &self.upper, &mut c, false, counters)?;
                Ok(c.into_elems())
            }
            CubeStage::UL1 => {
                let mut c1 = AccumulatorTile::zeros(self.s)?;
                matmul(&a, &self.ones, &mut c1, false, counters)?;
                let mut c2 = AccumulatorTile::zeros(self.s)?;
                matmul(&a, &self.upper, &mut c2, false, counters)?;
                let row_sums = c1.to_operand();
                matmul(&self.strict_lower, &row_sums, &mut c2, true, counters)?;
                Ok(c2.into_elems())
            }
        }
    }
}

/// Vector stage: adds the running `partial` to a locally scanned tile and
/// returns the new partial.
///
/// `chain` is the depth of the previous propagation step; it is advanced once
/// per `adds` issued. `ready` is the depth at which the tile's cube result
/// became available.
pub(crate) fn propagate<A: Scalar>(
    stage: CubeStage,
    tile: &mut [A],
    s: usize,
    mut partial: A,
    chain: &mut Depth,
    ready: Depth,
    counters: &mut WorkSpanCounters,
) -> A {
    match stage {
        CubeStage::U => {
            for row in tile.chunks_mut(s) {
                adds(row, partial, counters);
                partial = row[row.len() - 1];
                *chain = chain.join(ready).after_propagation();
            }
        }
        CubeStage::UL1 => {
            if !tile.is_empty() {
                adds(tile, partial, counters);
                partial = tile[tile.len() - 1];
                *chain = chain.join(ready).after_propagation();
            }
        }
    }
    counters.observe(*chain);
    partial
}
