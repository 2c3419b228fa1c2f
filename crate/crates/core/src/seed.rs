//! Seed derivation and the portable random source.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose 256-bit key is
//! derived from a 64-bit seed. Seeds are split hierarchically with
//! [`derive`]: a child seed is a SplitMix64 hash of the parent seed, a string
//! label and an index. Running the same experiment with the same master seed
//! reproduces every stream, independent of thread count or evaluation order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for `(label, index)` under `parent`.
pub fn derive(parent: u64, label: &str, index: u64) -> u64 {
    let a = mix64(parent ^ fnv1a(label));
    mix64(a.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Folds a sequence of words into one 64-bit digest.
pub fn digest_words<I: IntoIterator<Item = u64>>(words: I) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for w in words {
        h = mix64(h ^ w.wrapping_mul(GOLDEN));
    }
    h
}

/// ChaCha8 stream keyed by a 64-bit seed (key expanded with SplitMix64).
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = s.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform double in `[0, 1)` from the top 53 bits of one `u64`.
#[inline]
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..bound` (unbiased, rejection sampling).
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0, "uniform_index bound must be positive");
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Draws an index from a cumulative distribution.
///
/// `cdf` is non-decreasing with last entry 1 (up to rounding). Symbols whose
/// mass is zero are never returned.
pub fn sample_cdf<R: RngCore + ?Sized>(rng: &mut R, cdf: &[f64]) -> usize {
    let r = uniform01(rng);
    sample_cdf_at(cdf, r)
}

/// Inverse-CDF lookup for a given uniform variate.
pub fn sample_cdf_at(cdf: &[f64], r: f64) -> usize {
    let mut prev = 0.0;
    let mut last_positive = 0;
    for (i, &c) in cdf.iter().enumerate() {
        if c > prev {
            last_positive = i;
            if r < c {
                return i;
            }
        }
        prev = c;
    }
    last_positive
}

/// Cumulative sums of a mass vector.
pub fn cdf_of(mass: &[f64]) -> alloc::vec::Vec<f64> {
    let mut acc = 0.0;
    mass.iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}
