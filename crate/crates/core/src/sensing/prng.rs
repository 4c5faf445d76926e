//! Seeded permutations.
//!
//! The generator is xoshiro256** seeded through SplitMix64 from a single
//! 64-bit seed. Bounded integers use rejection sampling on the full 64-bit
//! output, and permutations are the descending Fisher-Yates shuffle, so a
//! seed fixes the permutation on every platform.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub struct PermutationRng(Xoshiro256StarStar);

impl PermutationRng {
    pub fn new(seed: u64) -> Self {
        PermutationRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = (u64::MAX / n) * n;
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Uniform random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}
