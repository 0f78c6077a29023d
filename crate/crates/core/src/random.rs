//! Seeded generators of random 1-bounded functions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fourier::e;
use crate::funcspace::{FiniteFunction, Interval};

/// A reproducible stream derived from a seed and a list of labels.
pub fn rng_for(seed: u64, labels: &[u64]) -> ChaCha8Rng {
    // splitmix64 finaliser over the labels gives well-separated seeds
    let mut h = seed;
    for &l in labels {
        h ^= l.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Families of random 1-bounded functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Uniform unimodular phases.
    Phases,
    /// Rademacher signs.
    Signs,
    /// Indicator of a random set, averaged over a short window.
    Smoothed,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Phases, Family::Signs, Family::Smoothed];

    pub fn sample(self, rng: &mut impl Rng, interval: Interval) -> FiniteFunction {
        match self {
            Family::Phases => phases(rng, interval),
            Family::Signs => signs(rng, interval),
            Family::Smoothed => smoothed_indicator(rng, interval),
        }
    }
}

pub fn phases(rng: &mut impl Rng, interval: Interval) -> FiniteFunction {
    FiniteFunction::from_fn(interval, |_| e(rng.gen::<f64>()))
}

pub fn signs(rng: &mut impl Rng, interval: Interval) -> FiniteFunction {
    FiniteFunction::from_fn(interval, |_| {
        Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)
    })
}

pub fn smoothed_indicator(rng: &mut impl Rng, interval: Interval) -> FiniteFunction {
    let density: f64 = rng.gen_range(0.2..0.8);
    let mut raw: Vec<f64> = interval
        .iter()
        .map(|_| if rng.gen::<f64>() < density { 1.0 } else { 0.0 })
        .collect();
    if !raw.contains(&1.0) {
        // keep the set nonempty
        let i = rng.gen_range(0..raw.len());
        raw[i] = 1.0;
    }
    let w = 3usize.min(raw.len());
    let n = raw.len();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (lo + w).min(n);
            raw[lo..hi].iter().sum::<f64>() / w as f64
        })
        .collect();
    FiniteFunction::from_real(interval.lo(), &values)
}

/// Uniform real weights on a window, normalised to a probability kernel.
pub fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
