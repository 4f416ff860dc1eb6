//! Seeded, portable random number generation.
//!
//! Everything random in this crate flows through a ChaCha8 stream plus the
//! explicit mappings below, so any consumer (including one in another
//! language) can reproduce the exact draws from a seed:
//!
//! - uniform `f64` in `[0, 1)`: top 53 bits of `next_u64`, scaled by 2^-53
//! - standard normal: Box–Muller on two uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`
//! - shuffle: Fisher–Yates with `next_u64() % (i + 1)` indices

use crate::math;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)`.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw (Box–Muller; one normal per two uniforms).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - uniform(rng); // (0, 1], keeps ln finite
    let u2 = uniform(rng);
    math::sqrt(-2.0 * math::log(u1)) * math::cos(2.0 * PI * u2)
}

/// `n` standard normal draws.
pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| standard_normal(rng)).collect()
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}
