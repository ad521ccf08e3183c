use super::{Operators, SplitResult};
use crate::counters::WorkSpanCounters;
use crate::error::{Error, Result};
use crate::exec_model::partition_blocks;
use crate::vector_engine::{gather_mask, mask_not, MaskSegment};

impl Operators {
    /// Stable split: flag-1 elements first, then flag-0 elements, each group
    /// in original order, with the source position of every output.
    ///
    /// Output offsets come from an exclusive scan of the `i8` mask; each
    /// block gathers its elements and writes them at those offsets.
    pub fn split_ind<T: Copy>(&mut self, x: &[T], flags: &MaskSegment) -> Result<SplitResult<T>> {
        self.split_parts(x, flags, Parts::All)
    }

    /// Flag-1 elements only, in original order (masked select).
    pub fn compress<T: Copy>(&mut self, x: &[T], mask: &MaskSegment) -> Result<Vec<T>> {
        Ok(self.split_parts(x, mask, Parts::TrueValues)?.values)
    }

    /// [`Operators::split_ind`] without the source positions, for callers
    /// that carry their own.
    pub(crate) fn split_values<T: Copy>(&mut self, x: &[T], flags: &MaskSegment) -> Result<Vec<T>> {
        Ok(self.split_parts(x, flags, Parts::AllValues)?.values)
    }

    fn split_parts<T: Copy>(
        &mut self,
        x: &[T],
        flags: &MaskSegment,
        parts: Parts,
    ) -> Result<SplitResult<T>> {
        let n = x.len();
        if flags.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: flags.len(),
            });
        }
        let offsets = self.run_scan(flags.flags(), true)?;
        let total_true = match n {
            0 => 0,
            _ => offsets[n - 1] as usize + usize::from(flags.get(n - 1)),
        };
        let keep_false = parts != Parts::TrueValues;
        let with_indices = parts == Parts::All;
        let out_len = if keep_false { n } else { total_true };

        let mut counters = WorkSpanCounters::default();
        let mut values: Vec<T> = x[..out_len].to_vec();
        let mut indices = vec![0usize; if with_indices { out_len } else { 0 }];
        let partition = partition_blocks(n, self.cfg.blocks, self.cfg.s)?;
        let positions: Vec<usize> = if with_indices { (0..n).collect() } else { Vec::new() };

        for range in partition.ranges().iter().filter(|r| !r.is_empty()) {
            let (a, b) = (range.start, range.end);
            let block_mask = flags.slice(a, b);
            let true_base = offsets[a] as usize;

            let vals = gather_mask(&x[a..b], &block_mask, &mut counters)?;
            values[true_base..true_base + vals.len()].copy_from_slice(&vals);
            if with_indices {
                let idx = gather_mask(&positions[a..b], &block_mask, &mut counters)?;
                indices[true_base..true_base + idx.len()].copy_from_slice(&idx);
            }

            if keep_false {
                let false_base = total_true + (a - true_base);
                let inverse = mask_not(&block_mask, &mut counters);
                let vals = gather_mask(&x[a..b], &inverse, &mut counters)?;
                values[false_base..false_base + vals.len()].copy_from_slice(&vals);
                if with_indices {
                    let idx = gather_mask(&positions[a..b], &inverse, &mut counters)?;
                    indices[false_base..false_base + idx.len()].copy_from_slice(&idx);
                }
            }
        }
        self.charge(&counters);
        Ok(SplitResult { values, indices })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parts {
    /// Both groups with source positions.
    All,
    /// Both groups, values only.
    AllValues,
    /// Flag-1 values only.
    TrueValues,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan_kernels::{ScanConfig, Strategy};

    fn ops() -> Operators {
        Operators::new(ScanConfig::new(Strategy::MCScan, 2, 3)).unwrap()
    }

    #[test]
    fn split_example() {
        let mut o = ops();
        let m = MaskSegment::new(vec![0, 1, 0, 1]).unwrap();
        let r = o.split_ind(&[5, 6, 7, 8], &m).unwrap();
        assert_eq!(r.values, [6, 8, 5, 7]);
        assert_eq!(r.indices, [1, 3, 0, 2]);
        assert_eq!(o.stats().scan_calls, 1);
    }

    #[test]
    fn split_all_true_is_identity() {
        let mut o = ops();
        let x: Vec<u16> = (0..23).collect();
        let r = o.split_ind(&x, &MaskSegment::new(vec![1; 23]).unwrap()).unwrap();
        assert_eq!(r.values, x);
        assert_eq!(r.indices, (0..23).collect::<Vec<_>>());
    }

    #[test]
    fn split_empty() {
        let mut o = ops();
        let r = o.split_ind::<u8>(&[], &MaskSegment::default()).unwrap();
        assert!(r.values.is_empty() && r.indices.is_empty());
    }

    #[test]
    fn split_length_mismatch() {
        let mut o = ops();
        let err = o.split_ind(&[1, 2], &MaskSegment::new(vec![1]).unwrap()).unwrap_err();
        assert!(err.is_contract_violation());
        assert!(o.compress(&[1, 2], &MaskSegment::new(vec![1]).unwrap()).is_err());
    }

    #[test]
    fn compress_cases() {
        let mut o = ops();
        assert_eq!(
            o.compress(&[9, 8, 7], &MaskSegment::new(vec![1, 0, 1]).unwrap()).unwrap(),
            [9, 7]
        );
        assert!(o
            .compress(&[9, 8, 7], &MaskSegment::new(vec![0, 0, 0]).unwrap())
            .unwrap()
            .is_empty());
    }
}
