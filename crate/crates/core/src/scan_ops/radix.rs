//! LSB radix sort over 16-bit keys, one stable split per bit.

use std::fmt::{self, Display};
use std::str::FromStr;

use super::{Operators, SortResult};
use crate::counters::WorkSpanCounters;
use crate::error::{Error, Result};
use crate::vector_engine::extract_radix;

/// Interpretation of 16-bit key patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyType {
    U16,
    I16,
    F16,
}

impl KeyType {
    pub fn name(&self) -> &'static str {
        match self {
            KeyType::U16 => "u16",
            KeyType::I16 => "i16",
            KeyType::F16 => "f16",
        }
    }
}

impl Display for KeyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KeyType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u16" => Ok(KeyType::U16),
            "i16" => Ok(KeyType::I16),
            "f16" => Ok(KeyType::F16),
            _ => Err(Error::InvalidArgument(format!("unknown key type '{s}'"))),
        }
    }
}

/// Maps a half-float bit pattern to a `u16` whose unsigned order is the
/// float order (`-0 < +0`, NaNs beyond the infinities).
pub fn encode_sortable(p: u16) -> u16 {
    if p & 0x8000 == 0 {
        p ^ 0x8000
    } else {
        !p
    }
}

pub fn decode_sortable(e: u16) -> u16 {
    if e & 0x8000 != 0 {
        e ^ 0x8000
    } else {
        !e
    }
}

pub fn encode_key(p: u16, key_type: KeyType) -> u16 {
    match key_type {
        KeyType::U16 => p,
        KeyType::I16 => p ^ 0x8000,
        KeyType::F16 => encode_sortable(p),
    }
}

pub fn decode_key(e: u16, key_type: KeyType) -> u16 {
    match key_type {
        KeyType::U16 => e,
        KeyType::I16 => e ^ 0x8000,
        KeyType::F16 => decode_sortable(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    Ascending,
    Descending,
}

impl Operators {
    /// Stable ascending sort of 16-bit keys with source indices.
    pub fn radix_sort(&mut self, keys: &[u16], key_type: KeyType) -> Result<SortResult<u16>> {
        self.radix_sort_bits(keys, key_type, 16)
    }

    /// Runs only the `bits` least significant passes of the encoded key.
    /// The output is fully sorted only when `bits == 16`.
    pub fn radix_sort_bits(
        &mut self,
        keys: &[u16],
        key_type: KeyType,
        bits: u32,
    ) -> Result<SortResult<u16>> {
        self.radix_sort_ordered(keys, key_type, bits, Order::Ascending)
    }

    /// Stable descending sort: equal keys keep ascending source indices.
    pub fn radix_sort_descending(
        &mut self,
        keys: &[u16],
        key_type: KeyType,
    ) -> Result<SortResult<u16>> {
        self.radix_sort_ordered(keys, key_type, 16, Order::Descending)
    }

    pub(crate) fn radix_sort_ordered(
        &mut self,
        keys: &[u16],
        key_type: KeyType,
        bits: u32,
        order: Order,
    ) -> Result<SortResult<u16>> {
        if bits == 0 || bits > 16 {
            return Err(Error::InvalidArgument(format!(
                "radix bit count {bits} outside [1, 16]"
            )));
        }
        // descending = ascending on the complemented key
        let flip = match order {
            Order::Ascending => 0,
            Order::Descending => 0xFFFF,
        };
        let mut items: Vec<(u16, usize)> = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (encode_key(k, key_type) ^ flip, i))
            .collect();
        let mut counters = WorkSpanCounters::default();
        // encode pre-pass
        counters.record_vector(keys.len());

        let mut passes = 0;
        for bit in 0..bits {
            let encoded: Vec<u16> = items.iter().map(|&(e, _)| e).collect();
            let mask = extract_radix(&encoded, bit, &mut counters)?;
            items = self.split_values(&items, &mask)?;
            passes += 1;
            self.stats.split_passes += 1;
        }

        counters.record_vector(keys.len());
        self.charge(&counters);
        let (values, indices) = items
            .into_iter()
            .map(|(e, i)| (decode_key(e ^ flip, key_type), i))
            .unzip();
        Ok(SortResult {
            values,
            indices,
            passes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan_kernels::{ScanConfig, Strategy};
    use half::f16;
    use proptest::prelude::*;

    fn ops() -> Operators {
        Operators::new(ScanConfig::new(Strategy::MCScan, 4, 3)).unwrap()
    }

    #[test]
    fn encode_signed_zeros() {
        assert_eq!(encode_sortable(0x0000), 0x8000);
        assert_eq!(encode_sortable(0x8000), 0x7FFF);
        assert_eq!(decode_sortable(0x8000), 0x0000);
        assert_eq!(decode_sortable(0x7FFF), 0x8000);
    }

    #[test]
    fn sorts_small_u16() {
        let r = ops().radix_sort(&[3, 1, 2], KeyType::U16).unwrap();
        assert_eq!(r.values, [1, 2, 3]);
        assert_eq!(r.indices, [1, 2, 0]);
        assert_eq!(r.passes, 16);
    }

    #[test]
    fn sorts_i16_with_sign() {
        let x: Vec<u16> = [5i16, -3, 0, -32768, 32767, -3]
            .iter()
            .map(|&v| v as u16)
            .collect();
        let r = ops().radix_sort(&x, KeyType::I16).unwrap();
        let got: Vec<i16> = r.values.iter().map(|&v| v as i16).collect();
        assert_eq!(got, [-32768, -3, -3, 0, 5, 32767]);
        assert_eq!(r.indices, [3, 1, 5, 2, 0, 4]);
    }

    #[test]
    fn eight_bit_mode_runs_eight_passes() {
        let mut o = ops();
        let r = o.radix_sort_bits(&[0x0102, 0x0201, 0x0001], KeyType::U16, 8).unwrap();
        assert_eq!(r.passes, 8);
        assert_eq!(o.stats().split_passes, 8);
        // ordered by the low byte only
        assert_eq!(r.values, [0x0201, 0x0001, 0x0102]);
        assert!(o.radix_sort_bits(&[1], KeyType::U16, 17).is_err());
    }

    #[test]
    fn descending_keeps_ties_in_index_order() {
        let r = ops().radix_sort_descending(&[2, 7, 2, 7, 1], KeyType::U16).unwrap();
        assert_eq!(r.values, [7, 7, 2, 2, 1]);
        assert_eq!(r.indices, [1, 3, 0, 2, 4]);
    }

    #[test]
    fn nan_sorts_above_infinity() {
        let nan = f16::NAN.to_bits();
        let inf = f16::INFINITY.to_bits();
        let r = ops().radix_sort(&[nan, inf, 0], KeyType::F16).unwrap();
        assert_eq!(r.values, [0, inf, nan]);
    }

    proptest! {
        #[test]
        fn encoding_preserves_float_order(a in any::<u16>(), b in any::<u16>()) {
            let (fa, fb) = (f16::from_bits(a), f16::from_bits(b));
            prop_assume!(!fa.is_nan() && !fb.is_nan());
            if fa < fb {
                prop_assert!(encode_sortable(a) < encode_sortable(b));
            }
            if a != b && fa == fb {
                // only the two zeros compare equal; -0 encodes lower
                prop_assert_eq!(encode_sortable(a) < encode_sortable(b), a == 0x8000);
            }
        }

        #[test]
        fn decode_inverts_encode(p in any::<u16>()) {
            prop_assert_eq!(decode_sortable(encode_sortable(p)), p);
        }

        #[test]
        fn lsb_invariant_after_each_pass(keys in prop::collection::vec(any::<u16>(), 0..120), bits in 1u32..=16) {
            let r = ops().radix_sort_bits(&keys, KeyType::U16, bits).unwrap();
            let low = |v: u16| if bits == 16 { v } else { v & ((1u16 << bits) - 1) };
            for w in r.values.windows(2) {
                prop_assert!(low(w[0]) <= low(w[1]));
            }
            for (v, &i) in r.values.iter().zip(&r.indices) {
                prop_assert_eq!(*v, keys[i]);
            }
        }
    }
}
