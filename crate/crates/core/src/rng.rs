//! Seeded random streams.
//!
//! The generator is part of the data contract, so fixtures are portable:
//!
//! * a stream is ChaCha8 keyed by four successive SplitMix64 outputs of
//!   `seed ^ domain` (little-endian), with the ChaCha stream id set to the
//!   work-item index;
//! * uniforms take the top 53 bits of `next_u64`;
//! * standard normals come from the Box-Muller transform, consuming two
//!   uniforms per pair and returning the cosine branch first.
//!
//! Every replication, tree or trial gets its own `(seed, domain, index)`
//! stream, which is what makes parallel execution order-independent.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Domain tags separating independent uses of one seed.
pub mod domain {
    pub const WHITE_NOISE: u64 = 0x5748_4954_454e_4f49;
    pub const BOOTSTRAP: u64 = 0x424f_4f54_5354_5250;
    pub const FOREST: u64 = 0x464f_5245_5354_0001;
    pub const BAND: u64 = 0x4241_4e44_0000_0001;
    pub const PANEL: u64 = 0x5041_4e45_4c00_0001;
    pub const TRIAL: u64 = 0x5452_4941_4c00_0001;
}

/// One step of SplitMix64.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a text label (FNV-1a of the
/// label, xor-ed in, then one SplitMix64 step).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    let mut state = seed ^ hash;
    splitmix64(&mut state)
}

/// Opens the stream for work item `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut state = seed ^ domain;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Uniform on `[0, 1)`.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * TWO_POW_M53
}

/// Uniform on the open interval `(0, 1)`.
pub fn uniform_open<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
}

/// Uniform index in `0..n` without modulo bias. `n` must be positive.
pub fn index_below<R: RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    // Lemire's multiply-shift with rejection.
    let threshold = n.wrapping_neg() % n;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(n);
        if (m as u64) >= threshold {
            return (m >> 64) as usize;
        }
    }
}

/// Standard normal variates by Box-Muller.
#[derive(Debug, Default, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: RngCore>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = uniform_open(rng);
        let u2 = uniform(rng);
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, domain::TRIAL, 3);
            move |_| r.next_u64()
        });
        let b: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, domain::TRIAL, 3);
            move |_| r.next_u64()
        });
        let c: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, domain::TRIAL, 4);
            move |_| r.next_u64()
        });
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn index_below_stays_in_range() {
        let mut r = stream(1, 2, 3);
        for n in 1..50 {
            for _ in 0..20 {
                assert!(index_below(&mut r, n) < n);
            }
        }
    }

    #[test]
    fn derive_seed_depends_on_label() {
        assert_ne!(derive_seed(1, "bounds"), derive_seed(1, "rollcorr"));
        assert_eq!(derive_seed(1, "bounds"), derive_seed(1, "bounds"));
    }
}
