//! Deterministic, splittable random streams.
//!
//! Every stochastic step of the simulator draws from an [`RngStream`], a
//! ChaCha12 generator keyed from a 64-bit master seed. Independent child
//! streams are derived by reading a fresh key out of a dedicated keystream
//! of the parent (`substream`), so each party, the adversary and every
//! Monte Carlo trial consume their own generator and a whole experiment is
//! bit-for-bit reproducible from the seed alone.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A seeded random stream that can spawn independent child streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u8; 32],
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Creates the master stream for a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        let mut x = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        Self::from_key(key)
    }

    fn from_key(key: [u8; 32]) -> Self {
        Self {
            key,
            rng: ChaCha12Rng::from_seed(key),
        }
    }

    /// Derives the child stream identified by `tag`.
    ///
    /// The child key is read from ChaCha stream `tag + 1` under the parent
    /// key (the parent itself draws from stream 0), so children never share
    /// output with their parent or with siblings, derivation does not
    /// disturb the parent, and the same tag always yields the same child.
    pub fn substream(&self, tag: u64) -> Self {
        debug_assert!(tag < u64::MAX, "tag u64::MAX is reserved");
        let mut prf = ChaCha12Rng::from_seed(self.key);
        prf.set_stream(tag + 1);
        let mut key = [0u8; 32];
        prf.fill_bytes(&mut key);
        Self::from_key(key)
    }

    /// One uniform bit.
    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u32() >> 31) as u8
    }

    /// Uniform value in `{0, 1, 2, 3}`, used to walk quarter-unit
    /// probability tables without floating point.
    pub fn quarter(&mut self) -> u8 {
        (self.rng.next_u32() >> 30) as u8
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "bound must be positive");
        self.rng.random_range(0..bound)
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A uniformly chosen `count`-subset of `[0, total)`, sorted ascending.
    pub fn position_subset(&mut self, total: usize, count: usize) -> Vec<usize> {
        assert!(count <= total, "cannot pick {count} positions out of {total}");
        let mut picked = rand::seq::index::sample(&mut self.rng, total, count).into_vec();
        picked.sort_unstable();
        picked
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
