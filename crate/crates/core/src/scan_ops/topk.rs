//! Top-k by quickselect over stable splits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::radix::{encode_key, KeyType, Order};
use super::{Operators, SortResult};
use crate::counters::WorkSpanCounters;
use crate::error::{Error, Result};
use crate::vector_engine::{compare_eq, compare_gt};

impl Operators {
    /// The `k` largest keys in descending order with their source indices.
    ///
    /// Each round splits the candidates on `key > pivot` (random pivot drawn
    /// from `seed`) and keeps the side holding rank `k`. Keys equal to the
    /// pivot are split out next so every round makes progress. Candidates
    /// always stay in source order, so among equal keys the lowest indices
    /// win. After `2 * ceil(log2 n)` rounds the remaining candidates are
    /// radix sorted instead.
    pub fn top_k(
        &mut self,
        keys: &[u16],
        key_type: KeyType,
        k: usize,
        seed: u64,
    ) -> Result<SortResult<u16>> {
        let n = keys.len();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "k = {k} outside [1, {n}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counters = WorkSpanCounters::default();
        let max_rounds = 2 * (usize::BITS - (n - 1).leading_zeros()) as usize;

        // (encoded key, source index)
        let mut candidates: Vec<(u16, usize)> = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (encode_key(k, key_type), i))
            .collect();
        let mut selected: Vec<(u16, usize)> = Vec::with_capacity(k);
        let mut need = k;
        let mut rounds = 0;

        while need > 0 {
            if need == candidates.len() {
                selected.append(&mut candidates);
                break;
            }
            if rounds >= max_rounds {
                let enc: Vec<u16> = candidates.iter().map(|c| c.0).collect();
                let sorted = self.radix_sort_ordered(&enc, KeyType::U16, 16, Order::Descending)?;
                selected.extend(sorted.indices[..need].iter().map(|&j| candidates[j]));
                break;
            }
            rounds += 1;

            let pivot = candidates[rng.gen_range(0..candidates.len())].0;
            let enc: Vec<u16> = candidates.iter().map(|c| c.0).collect();
            let greater_mask = compare_gt(&enc, pivot, &mut counters);
            let greater = greater_mask.popcount();
            let split = self.split_values(&candidates, &greater_mask)?;
            if greater >= need {
                candidates = split[..greater].to_vec();
                continue;
            }
            selected.extend_from_slice(&split[..greater]);
            need -= greater;

            let rest = &split[greater..];
            let enc: Vec<u16> = rest.iter().map(|c| c.0).collect();
            let equal_mask = compare_eq(&enc, pivot, &mut counters);
            let equal = equal_mask.popcount();
            let split = self.split_values(rest, &equal_mask)?;
            if equal >= need {
                selected.extend_from_slice(&split[..need]);
                break;
            }
            selected.extend_from_slice(&split[..equal]);
            need -= equal;
            candidates = split[equal..].to_vec();
        }
        self.charge(&counters);

        let enc: Vec<u16> = selected.iter().map(|c| c.0).collect();
        let sorted = self.radix_sort_ordered(&enc, KeyType::U16, 16, Order::Descending)?;
        let indices: Vec<usize> = sorted.indices.iter().map(|&j| selected[j].1).collect();
        let values = indices.iter().map(|&i| keys[i]).collect();
        Ok(SortResult {
            values,
            indices,
            passes: sorted.passes,
        })
    }
}
