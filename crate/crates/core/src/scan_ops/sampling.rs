//! Nucleus (top-p) and weighted sampling via inverse transform.
//!
//! Uniform draws come from ChaCha8 seeded with a `u64`; a draw uses the high
//! 53 bits of one 64-bit output.

use half::f16;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::radix::{KeyType, Order};
use super::Operators;
use crate::counters::WorkSpanCounters;
use crate::dtype::{Scalar, Storage};
use crate::error::{Error, Result};
use crate::vector_engine::compare_gt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleDraw {
    pub index: usize,
    /// Seed of the generator that produced the uniform draw, if any.
    pub rng_seed: Option<u64>,
}

/// Probability-sorted prefix whose mass first reaches `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nucleus {
    /// Source indices in descending-probability order.
    order: Vec<usize>,
    /// Inclusive scan of the sorted probabilities.
    cumulative: Vec<f32>,
}

impl Nucleus {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Source indices in the nucleus, most probable first.
    pub fn indices(&self) -> &[usize] {
        &self.order
    }

    pub fn mass(&self) -> f32 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Maps a uniform `u` in `[0, 1)` to a source index.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.mass() as f64;
        let j = self
            .cumulative
            .partition_point(|&c| c as f64 <= target)
            .min(self.order.len() - 1);
        self.order[j]
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        self.pick(rng.gen::<f64>())
    }
}

impl Operators {
    /// Sorts `probs` descending (16 split scans), scans the sorted values
    /// and cuts at the smallest prefix whose sum reaches `p` of the total.
    pub fn nucleus(&mut self, probs: &[f16], p: f64) -> Result<Nucleus> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} outside (0, 1]")));
        }
        if let Some(i) = probs
            .iter()
            .position(|v| !v.is_finite() || v.to_f32() < 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "probability {i} is {} (must be finite and non-negative)",
                probs[i]
            )));
        }
        let bits: Vec<u16> = probs.iter().map(|v| v.to_bits()).collect();
        let sorted = self.radix_sort_ordered(&bits, KeyType::F16, 16, Order::Descending)?;
        let sorted_probs: Vec<f16> = sorted.values.iter().map(|&b| f16::from_bits(b)).collect();
        let cumulative = self.run_scan(&sorted_probs, false)?;

        let total = cumulative.last().copied().unwrap_or(0.0) as f64;
        if total <= 0.0 {
            return Err(Error::InvalidArgument(
                "probabilities sum to zero".into(),
            ));
        }
        let threshold = p * total;
        let cut = cumulative
            .iter()
            .position(|&c| c as f64 >= threshold)
            .unwrap_or(cumulative.len() - 1);

        let mut order = sorted.indices;
        order.truncate(cut + 1);
        let mut cumulative = cumulative;
        cumulative.truncate(cut + 1);
        Ok(Nucleus { order, cumulative })
    }

    /// One nucleus draw: 16 radix passes plus one cumulative scan.
    pub fn top_p_sample(&mut self, probs: &[f16], p: f64, seed: u64) -> Result<SampleDraw> {
        let nucleus = self.nucleus(probs, p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(SampleDraw {
            index: nucleus.sample(&mut rng),
            rng_seed: Some(seed),
        })
    }

    /// Smallest index whose inclusive prefix sum exceeds `theta * sum(w)`.
    ///
    /// The prefix sums are flagged against the threshold and the flag-1
    /// group of a split over the positions starts with the answer.
    pub fn weighted_sample<S: Storage>(&mut self, w: &[S], theta: f64) -> Result<SampleDraw> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta = {theta} outside [0, 1)"
            )));
        }
        if w.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        if let Some(i) = w.iter().position(|v| !(v.to_f64() > 0.0 && v.to_f64().is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {:?}, expected positive",
                w[i]
            )));
        }
        let cumulative = self.run_scan(w, false)?;
        let total = cumulative[cumulative.len() - 1].to_f64();
        let wide: Vec<f64> = cumulative.iter().map(|c| c.to_f64()).collect();
        let mut counters = WorkSpanCounters::default();
        let mask = compare_gt(&wide, theta * total, &mut counters);
        self.charge(&counters);

        let positions: Vec<usize> = (0..w.len()).collect();
        let split = self.split_values(&positions, &mask)?;
        Ok(SampleDraw {
            index: split[0],
            rng_seed: None,
        })
    }

    /// [`Operators::weighted_sample`] with `theta` drawn from `seed`.
    pub fn weighted_sample_seeded<S: Storage>(&mut self, w: &[S], seed: u64) -> Result<SampleDraw> {
        let theta = ChaCha8Rng::seed_from_u64(seed).gen::<f64>();
        let draw = self.weighted_sample(w, theta)?;
        Ok(SampleDraw {
            rng_seed: Some(seed),
            ..draw
        })
    }
}
