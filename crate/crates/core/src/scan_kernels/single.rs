//! Single-core kernels: one cube unit feeding one vector unit.

use super::tiles::{propagate, Constants, CubeStage};
use super::{ScanConfig, ScanOutput};
use crate::counters::{Depth, WorkSpanCounters};
use crate::dtype::{Scalar, Storage};
use crate::error::Result;
use crate::exec_model::ExecutionTrace;
use crate::vector_engine::add;

/// Cube `A @ U` per tile, then one `adds` per `s`-row carrying the running
/// partial sum.
pub fn scan_u<S: Storage>(x: &[S], cfg: &ScanConfig) -> Result<ScanOutput<S::Acc>> {
    scan_u_with_carry(x, cfg, <S::Acc as Scalar>::ZERO)
}

/// Three cube products per tile give a full local scan, then one `adds` per
/// tile carries the running partial sum.
pub fn scan_ul1<S: Storage>(x: &[S], cfg: &ScanConfig) -> Result<ScanOutput<S::Acc>> {
    scan_ul1_with_carry(x, cfg, <S::Acc as Scalar>::ZERO)
}

/// Vector-only reference: no cube work at all.
pub fn vector_baseline_scan<S: Storage>(
    x: &[S],
    cfg: &ScanConfig,
) -> Result<ScanOutput<S::Acc>> {
    vector_baseline_with_carry(x, cfg, <S::Acc as Scalar>::ZERO)
}

pub(crate) fn scan_u_with_carry<S: Storage>(
    x: &[S],
    cfg: &ScanConfig,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    single_core(CubeStage::U, x, cfg, carry)
}

pub(crate) fn scan_ul1_with_carry<S: Storage>(
    x: &[S],
    cfg: &ScanConfig,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    single_core(CubeStage::UL1, x, cfg, carry)
}

fn single_core<S: Storage>(
    stage: CubeStage,
    x: &[S],
    cfg: &ScanConfig,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    cfg.validate()?;
    let s = cfg.s;
    let tile = cfg.tile_elems();
    let consts = Constants::<S>::new(s)?;
    let mut values = vec![<S::Acc as Scalar>::ZERO; x.len()];
    let mut counters = WorkSpanCounters::default();
    let mut chain = Depth::ZERO;
    let mut partial = carry;

    for (seg, out) in x.chunks(tile).zip(values.chunks_mut(tile)) {
        let local = consts.cube_tile(stage, seg, &mut counters)?;
        counters.observe(stage.depth());
        out.copy_from_slice(&local[..seg.len()]);
        partial = propagate(stage, out, s, partial, &mut chain, stage.depth(), &mut counters);
    }

    Ok(ScanOutput {
        values,
        counters,
        trace: ExecutionTrace::default(),
    })
}

/// Each tile is transposed, swept column by column with vector adds (giving
/// row-local scans), then rows are propagated as in [`scan_u`].
pub(crate) fn vector_baseline_with_carry<S: Storage>(
    x: &[S],
    cfg: &ScanConfig,
    carry: S::Acc,
) -> Result<ScanOutput<S::Acc>> {
    cfg.validate()?;
    let s = cfg.s;
    let tile = cfg.tile_elems();
    let mut values = vec![<S::Acc as Scalar>::ZERO; x.len()];
    let mut counters = WorkSpanCounters::default();
    let mut chain = Depth::ZERO;
    let mut partial = carry;

    for (seg, out) in x.chunks(tile).zip(values.chunks_mut(tile)) {
        let rows = seg.len().div_ceil(s);
        // column-major copy of the zero-padded rows
        let mut cols = vec![<S::Acc as Scalar>::ZERO; rows * s];
        for (k, v) in seg.iter().enumerate() {
            cols[(k % s) * rows + k / s] = v.widen();
        }
        for j in 1..s {
            let (done, rest) = cols.split_at_mut(j * rows);
            add(&mut rest[..rows], &done[(j - 1) * rows..], &mut counters)?;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o = cols[(k % s) * rows + k / s];
        }
        let ready = Depth {
            units: (s - 1) as u64,
            propagation: 0,
        };
        counters.observe(ready);
        partial = propagate(CubeStage::U, out, s, partial, &mut chain, ready, &mut counters);
    }

    Ok(ScanOutput {
        values,
        counters,
        trace: ExecutionTrace::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan_kernels::Strategy;

    fn oracle(x: &[i8]) -> Vec<i32> {
        let mut acc = 0i32;
        x.iter()
            .map(|&v| {
                acc += v as i32;
                acc
            })
            .collect()
    }

    #[test]
    fn scan_u_small() {
        let cfg = ScanConfig::new(Strategy::ScanU, 2, 1);
        let out = scan_u(&[1i8, 2, 3, 4, 5], &cfg).unwrap();
        assert_eq!(out.values, [1, 3, 6, 10, 15]);
        assert_eq!(out.counters.matmul_count, 2);
        assert_eq!(out.counters.propagation_span, 3);
    }

    #[test]
    fn scan_u_zeros_and_empty() {
        let cfg = ScanConfig::new(Strategy::ScanU, 4, 1);
        assert_eq!(scan_u(&[0i8; 9], &cfg).unwrap().values, [0; 9]);
        let empty = scan_u::<i8>(&[], &cfg).unwrap();
        assert!(empty.values.is_empty());
        assert_eq!(empty.counters, WorkSpanCounters::default());
    }

    #[test]
    fn scan_u_single_tile_one_matmul() {
        let cfg = ScanConfig::new(Strategy::ScanU, 8, 1);
        let out = scan_u(&[1i8; 64], &cfg).unwrap();
        assert_eq!(out.counters.matmul_count, 1);
        assert_eq!(out.counters.vector_op_count, 8);
        // matmul followed by the 8-long adds chain
        assert_eq!(out.counters.span_units, 9);
    }

    #[test]
    fn scan_ul1_one_to_sixteen() {
        let x: Vec<i8> = (1..=16).collect();
        let cfg = ScanConfig::new(Strategy::ScanUL1, 4, 1);
        let out = scan_ul1(&x, &cfg).unwrap();
        let expected: Vec<i32> = (1..=16).map(|k| k * (k + 1) / 2).collect();
        assert_eq!(out.values, expected);
        assert_eq!(out.counters.matmul_count, 3);
        assert_eq!(out.counters.propagation_span, 1);
        assert_eq!(out.counters.span_units, 3);
    }

    #[test]
    fn scan_ul1_zero_tile() {
        let cfg = ScanConfig::new(Strategy::ScanUL1, 4, 1);
        let out = scan_ul1(&[0i8; 16], &cfg).unwrap();
        assert_eq!(out.values, [0; 16]);
        assert_eq!(out.counters.matmul_count, 3);
    }

    #[test]
    fn baseline_matches_oracle_without_cube() {
        let cfg = ScanConfig::new(Strategy::VectorBaseline, 2, 1);
        let out = vector_baseline_scan(&[2i8, 2], &cfg).unwrap();
        assert_eq!(out.values, [2, 4]);
        assert_eq!(out.counters.matmul_count, 0);

        let x: Vec<i8> = (0..103).map(|i| ((i * 37) % 255) as i8).collect();
        let cfg = ScanConfig::new(Strategy::VectorBaseline, 4, 1);
        assert_eq!(vector_baseline_scan(&x, &cfg).unwrap().values, oracle(&x));
    }

    #[test]
    fn kernels_agree_on_ragged_input() {
        let x: Vec<i8> = (0..3 * 64 + 7).map(|i| ((i * 91) % 256) as i8).collect();
        let cfg = ScanConfig::new(Strategy::ScanU, 8, 1);
        let expected = oracle(&x);
        assert_eq!(scan_u(&x, &cfg).unwrap().values, expected);
        assert_eq!(scan_ul1(&x, &cfg).unwrap().values, expected);
        assert_eq!(vector_baseline_scan(&x, &cfg).unwrap().values, expected);
    }

    #[test]
    fn carry_offsets_everything() {
        let cfg = ScanConfig::new(Strategy::ScanU, 2, 1);
        let out = scan_u_with_carry(&[1i8, 1, 1], &cfg, 10).unwrap();
        assert_eq!(out.values, [11, 12, 13]);
    }
}
