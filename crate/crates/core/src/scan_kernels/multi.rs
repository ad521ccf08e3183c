//! Multi-core scan with reduction recomputation.
//!
//! Phase I: per block, the cube path writes local tile scans to the output
//! while the vector path independently reduces the block's original input
//! into `r[i]`. After the barrier, Phase II: each block sums `r[..i]` itself
//! and propagates that offset through its tiles.

use super::tiles::{propagate, Constants, CubeStage};
use super::{ScanConfig, ScanOutput};
use crate::counters::{merge_counters, Depth};
use crate::dtype::{Scalar, Storage};
use crate::error::Result;
use crate::exec_model::{partition_blocks, Engine, OpKind};
use crate::vector_engine::reduce_sum;

/// Multi-core scan whose cube stage is `A @ U`; Phase II issues one `adds`
/// per `s`-row.
pub fn mc_scan<S: Storage>(x: &[S], cfg: &ScanConfig) -> Result<ScanOutput<S::Acc>> {
    mc_scan_with_carry(x, cfg, CubeStage::U, <S::Acc as Scalar>::ZERO)
}

/// Multi-core scan whose cube stage is the three-product full tile scan;
/// Phase II issues one `adds` per tile.
pub fn mc_scan_ul1<S: Storage>(x: &[S], cfg: &ScanConfig) -> Result<ScanOutput<S::Acc>> {
    mc_scan_with_carry(x, cfg, CubeStage::UL1, <S::Acc as Scalar>::ZERO)
}

pub(crate) fn mc_scan_with_carry<S: Storage>(
    x: &[S],
    cfg: &ScanConfig,
    stage: CubeStage,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    cfg.validate()?;
    let s = cfg.s;
    let tile = cfg.tile_elems();
    let partition = partition_blocks(x.len(), cfg.blocks, s)?;
    let ranges = partition.ranges().to_vec();
    let consts = Constants::<S>::new(s)?;
    let mut values = vec![<S::Acc as Scalar>::ZERO; x.len()];

    let run = cfg.executor().run_with_barrier(
        partition.split_mut(&mut values),
        |ctx, out| {
            let range = ranges[ctx.index].clone();
            let block = &x[range.clone()];
            if block.is_empty() {
                return Ok(<S::Acc as Scalar>::ZERO);
            }
            for (t, (seg, o)) in block.chunks(tile).zip(out.chunks_mut(tile)).enumerate() {
                let local = consts.cube_tile(stage, seg, &mut ctx.counters)?;
                o.copy_from_slice(&local[..seg.len()]);
                let start = range.start + t * tile;
                ctx.record(Engine::Cube, OpKind::Matmul, start..start + seg.len());
            }
            ctx.counters.observe(stage.depth());

            let r = reduce_sum(block, &mut ctx.counters);
            ctx.record(Engine::Vector, OpKind::ReduceSum, range);
            ctx.counters.observe(Depth::ZERO.after_op());
            Ok(r)
        },
        |ctx, out, reductions| {
            if out.is_empty() {
                return Ok(());
            }
            let start = ranges[ctx.index].start;
            let prefix = reduce_sum(&reductions[..ctx.index], &mut ctx.counters);
            ctx.record(Engine::Vector, OpKind::ReduceSum, 0..ctx.index);
            let ready = Depth::ZERO.after_op();
            ctx.counters.observe(ready);

            let mut partial = carry + prefix;
            let mut chain = Depth::ZERO;
            for (t, o) in out.chunks_mut(tile).enumerate() {
                partial = propagate(stage, o, s, partial, &mut chain, ready, &mut ctx.counters);
                let lo = start + t * tile;
                ctx.record(Engine::Vector, OpKind::Adds, lo..lo + o.len());
            }
            Ok(())
        },
    )?;

    let counters =
        merge_counters(&run.phase1_counters, 0).then(&merge_counters(&run.phase2_counters, 0));
    Ok(ScanOutput {
        values,
        counters,
        trace: run.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan_kernels::{scan_u, Strategy};
    use half::f16;

    #[test]
    fn single_block_equals_scan_u_bitwise() {
        let x: Vec<f16> = (0..300).map(|i| f16::from_f32((i % 13) as f32 * 0.37)).collect();
        let cfg = ScanConfig::new(Strategy::MCScan, 8, 1);
        let a = mc_scan(&x, &cfg).unwrap();
        let b = scan_u(&x, &cfg).unwrap();
        let bits = |v: &[f32]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.values), bits(&b.values));
    }

    #[test]
    fn ul1_matches_u_on_integers() {
        let x: Vec<i8> = (0..4 * 16 * 3 + 5).map(|i| ((i * 53) % 256) as i8).collect();
        let cfg = ScanConfig::new(Strategy::MCScan, 4, 5);
        assert_eq!(
            mc_scan(&x, &cfg).unwrap().values,
            mc_scan_ul1(&x, &cfg).unwrap().values
        );
    }

    #[test]
    fn ul1_counts_three_products_per_tile() {
        let s = 4;
        let cfg = ScanConfig::new(Strategy::MCScanUL1, s, 2);
        let out = mc_scan_ul1(&vec![0i8; 4 * s * s], &cfg).unwrap();
        assert!(out.values.iter().all(|&v| v == 0));
        assert_eq!(out.counters.matmul_count, 12);
        assert_eq!(out.counters.propagation_span, 2);
    }

    #[test]
    fn trace_is_barrier_ordered() {
        let s = 4;
        let cfg = ScanConfig::new(Strategy::MCScan, s, 2).with_trace(true);
        let out = mc_scan(&vec![1i8; 4 * s * s], &cfg).unwrap();
        out.trace.validate().unwrap();
        assert_eq!(out.trace.barrier_count(), 1);
        let text = out.trace.to_text();
        assert!(text.starts_with("0\tI\tcube\tmatmul\t0..16\n"));
        assert!(text.contains("1\tII\tvector\tadds\t48..64"));
    }

    #[test]
    fn span_counts_busiest_block() {
        let s = 4;
        let cfg = ScanConfig::new(Strategy::MCScan, s, 2);
        let out = mc_scan(&vec![1i8; 5 * s * s], &cfg).unwrap();
        // blocks hold 3 and 2 tiles; 3 tiles = 12 rows
        assert_eq!(out.counters.propagation_span, 12);
        // phase I (1) + prefix (1) + 12 adds
        assert_eq!(out.counters.span_units, 14);
        assert!(out.counters.span_units <= out.counters.total_ops());
    }
}
