//! Vector unit emulation.
//!
//! Each function is one vector instruction: it bumps `vector_op_count` by one
//! and `vector_elems` by the instruction length.

use crate::counters::WorkSpanCounters;
use crate::dtype::Scalar;
use crate::error::{Error, Result};

/// 0/1 flags stored as `i8`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaskSegment(Vec<i8>);

impl MaskSegment {
    pub fn new(flags: Vec<i8>) -> Result<Self> {
        if let Some(pos) = flags.iter().position(|&f| f != 0 && f != 1) {
            return Err(Error::InvalidArgument(format!(
                "mask entry {pos} is {}, expected 0 or 1",
                flags[pos]
            )));
        }
        Ok(MaskSegment(flags))
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        MaskSegment(flags.into_iter().map(i8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flags(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&f| f == 1).count()
    }

    pub fn slice(&self, start: usize, end: usize) -> MaskSegment {
        MaskSegment(self.0[start..end].to_vec())
    }
}

/// `v[i] += scalar` in the segment's own dtype.
pub fn adds<T: Scalar>(v: &mut [T], scalar: T, counters: &mut WorkSpanCounters) {
    for x in v.iter_mut() {
        *x = x.add_same(scalar);
    }
    counters.record_vector(v.len());
}

/// Element-wise `dst[i] += src[i]`.
pub fn add<T: Scalar>(dst: &mut [T], src: &[T], counters: &mut WorkSpanCounters) -> Result<()> {
    if dst.len() != src.len() {
        return Err(Error::LengthMismatch {
            expected: dst.len(),
            actual: src.len(),
        });
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = d.add_same(s);
    }
    counters.record_vector(dst.len());
    Ok(())
}

/// Sum in the wide dtype using a fixed balanced tree.
///
/// Runs of at most eight elements are summed left to right; longer ranges
/// split at the midpoint. The order depends only on the length.
pub fn reduce_sum<T: Scalar>(v: &[T], counters: &mut WorkSpanCounters) -> T::Acc {
    counters.record_vector(v.len());
    tree_sum(v)
}

fn tree_sum<T: Scalar>(v: &[T]) -> T::Acc {
    if v.len() <= 8 {
        return v.iter().fold(T::Acc::ZERO, |acc, x| acc + x.widen());
    }
    let (lo, hi) = v.split_at(v.len() / 2);
    tree_sum(lo) + tree_sum(hi)
}

/// Elements of `v` whose flag is 1, packed in their original order.
pub fn gather_mask<T: Copy>(
    v: &[T],
    mask: &MaskSegment,
    counters: &mut WorkSpanCounters,
) -> Result<Vec<T>> {
    if v.len() != mask.len() {
        return Err(Error::LengthMismatch {
            expected: v.len(),
            actual: mask.len(),
        });
    }
    let mut out = Vec::with_capacity(mask.popcount());
    out.extend(v.iter().zip(mask.flags()).filter(|(_, &f)| f == 1).map(|(&x, _)| x));
    counters.record_vector(v.len());
    Ok(out)
}

/// `NOT((v[i] >> bit) & 1)`: 1 where the bit is clear, so a split on this
/// mask moves zero bits first.
pub fn extract_radix(
    v: &[u16],
    bit: u32,
    counters: &mut WorkSpanCounters,
) -> Result<MaskSegment> {
    if bit >= 16 {
        return Err(Error::BitOutOfRange(bit));
    }
    let flags = v.iter().map(|&p| (!(p >> bit) & 1) as i8).collect();
    // ShiftRight then Not
    counters.record_vector(v.len());
    counters.record_vector(v.len());
    Ok(MaskSegment(flags))
}

pub fn mask_not(mask: &MaskSegment, counters: &mut WorkSpanCounters) -> MaskSegment {
    counters.record_vector(mask.len());
    MaskSegment(mask.0.iter().map(|&f| 1 - f).collect())
}

/// Flags `v[i] > threshold`.
pub fn compare_gt<T: PartialOrd + Copy>(
    v: &[T],
    threshold: T,
    counters: &mut WorkSpanCounters,
) -> MaskSegment {
    counters.record_vector(v.len());
    MaskSegment::from_bools(v.iter().map(|&x| x > threshold))
}

/// Flags `v[i] == value`.
pub fn compare_eq<T: PartialEq + Copy>(
    v: &[T],
    value: T,
    counters: &mut WorkSpanCounters,
) -> MaskSegment {
    counters.record_vector(v.len());
    MaskSegment::from_bools(v.iter().map(|&x| x == value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use half::f16;
    use proptest::prelude::*;

    #[test]
    fn adds_broadcasts() {
        let mut c = WorkSpanCounters::default();
        let mut v = vec![1i32, 2, 3];
        adds(&mut v, 10, &mut c);
        assert_eq!(v, [11, 12, 13]);
        assert_eq!((c.vector_op_count, c.vector_elems), (1, 3));

        let mut empty: Vec<i32> = vec![];
        adds(&mut empty, 5, &mut c);
        assert!(empty.is_empty());
    }

    #[test]
    fn adds_f16_rounds() {
        let mut c = WorkSpanCounters::default();
        let big = f16::from_f32(2048.0);
        let mut v = vec![big, big];
        adds(&mut v, f16::ONE, &mut c);
        assert_eq!(v, [big, big]);
    }

    #[test]
    fn reduce_sum_basics() {
        let mut c = WorkSpanCounters::default();
        assert_eq!(reduce_sum(&[1i8, 2, 3, 4], &mut c), 10);
        assert_eq!(reduce_sum::<i8>(&[], &mut c), 0);
        assert_eq!(c.vector_op_count, 2);
    }

    #[test]
    fn reduce_sum_matches_sequential_on_i8() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Vec<i8> = (0..1000).map(|_| rng.gen()).collect();
        let expected: i32 = v.iter().map(|&x| x as i32).sum();
        assert_eq!(reduce_sum(&v, &mut WorkSpanCounters::default()), expected);
    }

    #[test]
    fn gather_mask_cases() {
        let mut c = WorkSpanCounters::default();
        let v = [5, 6, 7, 8];
        let m = MaskSegment::new(vec![0, 1, 0, 1]).unwrap();
        assert_eq!(gather_mask(&v, &m, &mut c).unwrap(), [6, 8]);
        let all = MaskSegment::new(vec![1; 4]).unwrap();
        assert_eq!(gather_mask(&v, &all, &mut c).unwrap(), v);
        let none = MaskSegment::new(vec![0; 4]).unwrap();
        assert!(gather_mask(&v, &none, &mut c).unwrap().is_empty());
        let short = MaskSegment::new(vec![1; 3]).unwrap();
        assert!(gather_mask(&v, &short, &mut c).unwrap_err().is_contract_violation());
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert!(MaskSegment::new(vec![0, 2]).is_err());
    }

    #[test]
    fn extract_radix_cases() {
        let mut c = WorkSpanCounters::default();
        assert_eq!(extract_radix(&[0b10, 0b11], 0, &mut c).unwrap().flags(), &[1, 0]);
        assert_eq!(extract_radix(&[0b10, 0b11], 1, &mut c).unwrap().flags(), &[0, 0]);
        assert!(matches!(
            extract_radix(&[1], 16, &mut c),
            Err(Error::BitOutOfRange(16))
        ));
    }

    proptest! {
        #[test]
        fn extract_radix_matches_bit_test(v in prop::collection::vec(any::<u16>(), 0..200), bit in 0u32..16) {
            let m = extract_radix(&v, bit, &mut WorkSpanCounters::default()).unwrap();
            for (i, &p) in v.iter().enumerate() {
                prop_assert_eq!(m.get(i), p & (1 << bit) == 0);
            }
        }

        #[test]
        fn gather_len_is_popcount(bits in prop::collection::vec(any::<bool>(), 0..300)) {
            let v: Vec<usize> = (0..bits.len()).collect();
            let m = MaskSegment::from_bools(bits.iter().copied());
            let g = gather_mask(&v, &m, &mut WorkSpanCounters::default()).unwrap();
            prop_assert_eq!(g.len(), m.popcount());
        }

        #[test]
        fn adds_negated_restores(v in prop::collection::vec(any::<i32>(), 0..100), k in any::<i32>()) {
            let mut c = WorkSpanCounters::default();
            let mut w = v.clone();
            adds(&mut w, k, &mut c);
            adds(&mut w, k.wrapping_neg(), &mut c);
            prop_assert_eq!(w, v);
        }

        #[test]
        fn reduce_sum_permutation_invariant(mut v in prop::collection::vec(any::<i8>(), 0..500), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut c = WorkSpanCounters::default();
            let a = reduce_sum(&v, &mut c);
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, reduce_sum(&v, &mut c));
        }
    }
}
