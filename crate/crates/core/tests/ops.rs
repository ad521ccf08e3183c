//! Property tests for the scan-based operators.

use cubescan::vector_engine::MaskSegment;
use cubescan::{f16, KeyType, Operators, ScanConfig};
use proptest::prelude::*;

fn ops() -> Operators {
    Operators::new(ScanConfig::new(cubescan::Strategy::MCScan, 4, 3)).unwrap()
}

fn stable_two_lists(x: &[u16], flags: &[bool]) -> (Vec<u16>, Vec<usize>) {
    let trues = (0..x.len()).filter(|&i| flags[i]);
    let falses = (0..x.len()).filter(|&i| !flags[i]);
    let idx: Vec<usize> = trues.chain(falses).collect();
    (idx.iter().map(|&i| x[i]).collect(), idx)
}

fn keys_with_ties() -> impl Strategy<Value = Vec<u16>> {
    prop::collection::vec(prop_oneof![any::<u16>(), 0u16..4], 0..150)
}

fn key_type() -> impl Strategy<Value = KeyType> {
    prop::sample::select(vec![KeyType::U16, KeyType::I16, KeyType::F16])
}

fn key_order(a: u16, b: u16, kt: KeyType) -> std::cmp::Ordering {
    match kt {
        KeyType::U16 => a.cmp(&b),
        KeyType::I16 => (a as i16).cmp(&(b as i16)),
        KeyType::F16 => f16::from_bits(a).total_cmp(&f16::from_bits(b)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_matches_two_list_oracle(
        pairs in prop::collection::vec((any::<u16>(), any::<bool>()), 0..300),
        algo in prop::sample::select(cubescan::Strategy::ALL.to_vec()),
    ) {
        let (x, flags): (Vec<u16>, Vec<bool>) = pairs.into_iter().unzip();
        let mask = MaskSegment::from_bools(flags.iter().copied());
        let mut o = Operators::new(ScanConfig::new(algo, 3, 4)).unwrap();
        let split = o.split_ind(&x, &mask).unwrap();
        let (values, indices) = stable_two_lists(&x, &flags);
        prop_assert_eq!(&split.values, &values);
        prop_assert_eq!(&split.indices, &indices);

        let mut seen = indices.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..x.len()).collect::<Vec<_>>());

        let kept = o.compress(&x, &mask).unwrap();
        prop_assert_eq!(&kept[..], &split.values[..mask.popcount()]);
    }

    #[test]
    fn radix_sort_is_stable_and_complete(keys in keys_with_ties(), kt in key_type()) {
        let r = ops().radix_sort(&keys, kt).unwrap();
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&i, &j| key_order(keys[i], keys[j], kt));
        prop_assert_eq!(&r.indices, &idx);
        prop_assert_eq!(r.values, idx.iter().map(|&i| keys[i]).collect::<Vec<_>>());
        prop_assert_eq!(r.passes, 16);
    }

    #[test]
    fn radix_passes_sort_low_bits(keys in keys_with_ties(), bits in 1u32..16) {
        let r = ops().radix_sort_bits(&keys, KeyType::U16, bits).unwrap();
        let low = |v: u16| v & ((1u16 << bits) - 1);
        prop_assert!(r.values.windows(2).all(|w| low(w[0]) <= low(w[1])));
        prop_assert_eq!(r.passes, bits);
    }

    #[test]
    fn top_k_matches_sort_then_take(
        keys in prop::collection::vec(prop_oneof![any::<u16>(), 0u16..3], 1..200),
        kt in key_type(),
        k_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let k = 1 + ((keys.len() - 1) as f64 * k_frac) as usize;
        let r = ops().top_k(&keys, kt, k, seed).unwrap();
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&i, &j| key_order(keys[j], keys[i], kt));
        idx.truncate(k);
        prop_assert_eq!(&r.indices, &idx);
        prop_assert_eq!(r.values, idx.iter().map(|&i| keys[i]).collect::<Vec<_>>());
    }

    #[test]
    fn weighted_sample_is_the_inverse_cdf(
        weights in prop::collection::vec(1i8..=100, 1..40),
        theta in 0.0f64..1.0,
    ) {
        let total: i64 = weights.iter().map(|&w| w as i64).sum();
        let mut cum = 0i64;
        let expected = weights
            .iter()
            .position(|&w| {
                cum += w as i64;
                cum as f64 > theta * total as f64
            })
            .unwrap();
        prop_assert_eq!(ops().weighted_sample(&weights, theta).unwrap().index, expected);
    }

    #[test]
    fn nucleus_is_the_smallest_sufficient_prefix(
        raw in prop::collection::vec(0.0f32..1.0, 1..64),
        p in 0.05f64..=1.0,
    ) {
        let probs: Vec<f16> = raw.iter().map(|&v| f16::from_f32(v)).collect();
        prop_assume!(probs.iter().any(|v| v.to_f32() > 0.0));
        let nucleus = ops().nucleus(&probs, p).unwrap();
        let kept: Vec<f64> = nucleus.indices().iter().map(|&i| probs[i].to_f64()).collect();
        prop_assert!(kept.windows(2).all(|w| w[0] >= w[1]));
        let total: f64 = probs.iter().map(|v| v.to_f64()).sum();
        let mass: f64 = kept.iter().sum();
        prop_assert!(mass >= p * total * (1.0 - 1e-5));
        prop_assert!(mass - kept[kept.len() - 1] < p * total * (1.0 + 1e-5));
    }
}

#[test]
fn signed_zero_infinity_and_nan_order() {
    let keys: Vec<u16> = [f16::NAN, f16::INFINITY, f16::NEG_ZERO, f16::ZERO, f16::NEG_INFINITY, f16::ONE]
        .iter()
        .map(|v| v.to_bits())
        .collect();
    let r = ops().radix_sort(&keys, KeyType::F16).unwrap();
    assert_eq!(r.indices, [4, 2, 3, 5, 1, 0]);
}

#[test]
fn each_top_p_draw_issues_seventeen_scans() {
    let probs: Vec<f16> = (1..=64).map(|i| f16::from_f32(i as f32 / 2080.0)).collect();
    let mut o = ops();
    for draw in 0..5u64 {
        o.top_p_sample(&probs, 0.9, draw).unwrap();
        assert_eq!(o.stats().scan_calls, 17 * (draw + 1));
    }
}

#[test]
fn top_p_draws_stay_inside_the_nucleus() {
    let probs: Vec<f16> = (0..50).map(|i| f16::from_f32(((i * 7) % 11) as f32 + 0.5)).collect();
    let mut o = ops();
    let nucleus = o.nucleus(&probs, 0.5).unwrap();
    for seed in 0..50 {
        let d = o.top_p_sample(&probs, 0.5, seed).unwrap();
        assert!(nucleus.indices().contains(&d.index));
        assert_eq!(d.rng_seed, Some(seed));
    }
}
