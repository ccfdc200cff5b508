//! Counter-based, splittable pseudorandom generator.
//!
//! Algorithm `splitmix64-ctr-v1`: draw i of stream with key K is
//! `mix64(K + (i+1) * 0x9E3779B97F4A7C15)` where `mix64` is the SplitMix64
//! finalizer (Steele, Lea & Flood). Being a pure function of (key, counter),
//! the generator is trivially reproducible, supports O(1) jump-ahead, and
//! derives independent streams for parallel trials without shared state.

/// Identifier recorded in measurement records.
pub const RNG_ALGORITHM: &str = "splitmix64-ctr-v1";

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Child seed for the independent stream labeled `index`; equals the key of
/// `CounterRng::seeded(seed).stream(index)` so records stay reproducible
/// from (seed, index) alone.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN) ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn seeded(seed: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ GOLDEN),
            counter: 0,
        }
    }

    /// Derive an independent stream; `(seed, index)` pairs map to
    /// non-colliding keys for all practical purposes.
    pub fn stream(&self, index: u64) -> Self {
        CounterRng {
            key: mix64(self.key ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
