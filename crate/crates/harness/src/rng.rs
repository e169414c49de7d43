//! Seeded random numbers.
//!
//! The generator is SplitMix64: state `s` advances by `0x9E3779B97F4A7C15`
//! and each output is the mixed state
//!
//! ```text
//! z = s; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits, `(x >> 11) · 2⁻⁵³`. A child stream
//! is seeded with the parent's next output.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct Rng64 {
    inner: SplitMix64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `0..n` by rejection, so every index is equally likely.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Independent child stream.
    pub fn split(&mut self) -> Self {
        Self::new(self.next_u64())
    }
}
