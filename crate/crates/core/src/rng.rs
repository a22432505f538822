//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`SampleRng`], a ChaCha8
//! stream cipher generator (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. ChaCha8's output stream is fixed by its published
//! algorithm, so fixtures recorded with a seed reproduce on every platform.
//!
//! Uniform floats are formed from the top 53 bits of one `u64` draw:
//! `(x >> 11) * 2^-53`, which lies in `[0, 1)`.
//!
//! Per-job seeds are derived with the SplitMix64 finalizer applied to the
//! run seed and each job coordinate in turn ([`derive_seed`]).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: ChaCha8Rng,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a run seed with job coordinates into an independent stream seed.
pub fn derive_seed(run_seed: u64, coordinates: &[u64]) -> u64 {
    coordinates.iter().fold(splitmix64(run_seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}
