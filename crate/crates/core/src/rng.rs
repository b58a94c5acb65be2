//! Pinned random number generator for reproducible Monte Carlo runs.
//!
//! The generator is xoshiro256++ whose 256-bit state is filled with the
//! first four outputs of SplitMix64 started at the user seed. Derived draws:
//!
//! * a fair bit is the top bit of one 64-bit output;
//! * a uniform in `[0, 1)` is the top 53 bits of one output times `2^-53`.
//!
//! Any implementation following these rules reproduces our transcripts.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct ShotRng {
    inner: Xoshiro256PlusPlus,
}

impl ShotRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent transcription of the published
    // SplitMix64 and xoshiro256++ algorithms.
    #[test]
    fn matches_reference_stream() {
        let mut rng = ShotRng::new(42);
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(got, REFERENCE_SEED_42);

        let mut rng = ShotRng::new(0);
        assert_eq!(rng.next_u64(), REFERENCE_SEED_0_FIRST);
    }

    #[test]
    fn derived_draws() {
        let mut a = ShotRng::new(42);
        let mut b = ShotRng::new(42);
        assert_eq!(a.next_bit() as u64, REFERENCE_SEED_42[0] >> 63);
        let u = b.next_unit();
        assert_eq!(u, (REFERENCE_SEED_42[0] >> 11) as f64 / 9007199254740992.0);
        assert!((0.0..1.0).contains(&u));
    }

    const REFERENCE_SEED_42: [u64; 4] = [
        15021278609987233951,
        5881210131331364753,
        18149643915985481100,
        12933668939759105464,
    ];
    const REFERENCE_SEED_0_FIRST: u64 = 5987356902031041503;
}
