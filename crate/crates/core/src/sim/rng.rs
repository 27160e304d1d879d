//! Counter-addressed random streams.
//!
//! Every draw is addressed by `(seed, shot, slot, purpose)`: the shot selects
//! a ChaCha stream and `(slot, purpose)` selects a fixed word offset inside
//! it. A shot's randomness therefore does not depend on which thread ran it,
//! on how many shots ran before it, or on how many draws other slots made.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Prep = 0,
    Decay = 1,
    Twirl = 2,
    Readout = 3,
    Reset = 4,
    Resample = 5,
}

const PURPOSES: u128 = 8;
/// 32-bit words reserved per `(slot, purpose)` block.
const BLOCK_WORDS: u128 = 1 << 20;

pub struct ShotRng {
    inner: ChaCha8Rng,
}

impl ShotRng {
    pub fn new(seed: u64, shot: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(shot);
        Self { inner }
    }

    /// Repositions the stream at the block for `(slot, purpose)`.
    pub fn at(&mut self, slot: usize, purpose: Purpose) -> &mut Self {
        let block = slot as u128 * PURPOSES + purpose as u128;
        self.inner.set_word_pos(block * BLOCK_WORDS);
        self
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        // p = 0 must never fire and p = 1 must always fire.
        p > 0.0 && self.uniform() < p
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }
}
