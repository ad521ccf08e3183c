//! Seeded input generators.

use half::f16;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::scan_ops::KeyType;

/// Uniform values in `[0, 1)`, rounded to f16.
pub fn unit_f16<R: Rng>(n: usize, rng: &mut R) -> Vec<f16> {
    (0..n).map(|_| f16::from_f32(rng.gen::<f32>())).collect()
}

pub fn uniform_i8<R: Rng>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| rng.gen()).collect()
}

pub fn uniform_u16<R: Rng>(n: usize, rng: &mut R) -> Vec<u16> {
    (0..n).map(|_| rng.gen()).collect()
}

const F16_SPECIALS: [u16; 4] = [0x0000, 0x8000, 0x7C00, 0xFC00];

/// Random 16-bit keys. For f16 keys about a tenth are signed zeros or
/// infinities and about a fifth repeat an earlier key.
pub fn sort_keys<R: Rng>(n: usize, key_type: KeyType, rng: &mut R) -> Vec<u16> {
    let mut keys = uniform_u16(n, rng);
    if key_type == KeyType::F16 {
        for i in 0..n {
            let roll: f64 = rng.gen();
            if roll < 0.1 {
                keys[i] = F16_SPECIALS[rng.gen_range(0..F16_SPECIALS.len())];
            } else if roll < 0.3 && i > 0 {
                keys[i] = keys[rng.gen_range(0..i)];
            }
        }
    }
    keys
}

/// Softmax of Gaussian logits with standard deviation `sigma`, as f16.
pub fn peaked_probs<R: Rng>(vocab: usize, sigma: f64, rng: &mut R) -> Vec<f16> {
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    let logits: Vec<f64> = (0..vocab).map(|_| normal.sample(rng)).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| f16::from_f64(w / total)).collect()
}

/// 0/1 flags, each set with probability `density`.
pub fn mask_flags<R: Rng>(n: usize, density: f64, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(density)).collect()
}
