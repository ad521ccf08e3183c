//! Reference implementations the CLI verifies against.

use std::cmp::Ordering;

use half::f16;

use crate::dtype::Storage;
use crate::scan_ops::{encode_key, KeyType};

/// Allowed f16 scan error relative to the running sum of magnitudes.
pub const F16_REL_TOL: f64 = 1e-2;
/// Largest total-variation distance a nucleus sampling run may show.
pub const TV_TOL: f64 = 0.02;
/// Standard deviations a weighted-sampling frequency may stray.
pub const FREQ_SIGMAS: f64 = 3.0;

/// Storage types whose scans can be checked against a sequential oracle.
pub trait ScanOracle: Storage {
    fn scan_matches(x: &[Self], got: &[Self::Acc], exclusive: bool) -> bool;
}

impl ScanOracle for i8 {
    /// Exact match with a wrapping `i32` running sum.
    fn scan_matches(x: &[i8], got: &[i32], exclusive: bool) -> bool {
        if got.len() != x.len() {
            return false;
        }
        let mut acc = 0i32;
        x.iter().zip(got).all(|(&v, &g)| {
            let before = acc;
            acc = acc.wrapping_add(v as i32);
            g == if exclusive { before } else { acc }
        })
    }
}

impl ScanOracle for f16 {
    /// Each output must lie within [`F16_REL_TOL`] of the `f64` running sum,
    /// scaled by the running sum of magnitudes (the plain relative error for
    /// non-negative inputs).
    fn scan_matches(x: &[f16], got: &[f32], exclusive: bool) -> bool {
        if got.len() != x.len() {
            return false;
        }
        let (mut acc, mut mag) = (0f64, 0f64);
        x.iter().zip(got).all(|(&v, &g)| {
            let (before, mag_before) = (acc, mag);
            acc += v.to_f64();
            mag += v.to_f64().abs();
            let (want, scale) = if exclusive { (before, mag_before) } else { (acc, mag) };
            (g as f64 - want).abs() <= F16_REL_TOL * scale
        })
    }
}

/// Key comparison in the order a radix sort of `key_type` must produce.
pub fn key_cmp(a: u16, b: u16, key_type: KeyType) -> Ordering {
    match key_type {
        KeyType::U16 => a.cmp(&b),
        KeyType::I16 => (a as i16).cmp(&(b as i16)),
        KeyType::F16 => f16::from_bits(a).total_cmp(&f16::from_bits(b)),
    }
}

/// Source indices of a stable ascending sort. With `bits < 16` only the
/// low `bits` of the order-preserving encoding take part.
pub fn stable_sort_indices(keys: &[u16], key_type: KeyType, bits: u32) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    if bits >= 16 {
        idx.sort_by(|&i, &j| key_cmp(keys[i], keys[j], key_type));
    } else {
        let low = |k: u16| encode_key(k, key_type) & ((1u16 << bits) - 1);
        idx.sort_by_key(|&i| low(keys[i]));
    }
    idx
}

/// Source indices of the `k` largest keys, largest first, lower index first
/// among equal keys.
pub fn top_k_indices(keys: &[u16], key_type: KeyType, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&i, &j| key_cmp(keys[j], keys[i], key_type));
    idx.truncate(k);
    idx
}

/// Truncated and renormalized nucleus distribution over the full vocabulary.
pub fn nucleus_distribution(probs: &[f16], p: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&i, &j| probs[j].to_f64().total_cmp(&probs[i].to_f64()));
    let total: f64 = probs.iter().map(|v| v.to_f64()).sum();
    let mut out = vec![0.0; probs.len()];
    let mut cum = 0.0;
    for &i in &idx {
        cum += probs[i].to_f64();
        out[i] = probs[i].to_f64();
        if cum >= p * total {
            break;
        }
    }
    let kept: f64 = out.iter().sum();
    out.iter_mut().for_each(|q| *q /= kept);
    out
}

/// Half the L1 distance between the empirical distribution of `counts`
/// and `expected`.
pub fn total_variation(counts: &[u64], expected: &[f64]) -> f64 {
    let draws: u64 = counts.iter().sum();
    if draws == 0 {
        return 0.0;
    }
    0.5 * counts
        .iter()
        .zip(expected)
        .map(|(&c, &q)| (c as f64 / draws as f64 - q).abs())
        .sum::<f64>()
}

/// Smallest index whose inclusive prefix sum exceeds `theta * sum(w)`,
/// found by binary search.
pub fn inverse_cdf_index(w: &[f64], theta: f64) -> usize {
    let cum: Vec<f64> = w
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let target = theta * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= target).min(w.len() - 1)
}
