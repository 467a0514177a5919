//! Deterministic, splittable random streams.
//!
//! A [`StreamKey`] is a 256-bit ChaCha key. Child keys are derived by stable
//! hashing of integer tags, and each key exposes 2^64 independent streams.
//! Generation code draws offspring `l` of generation `g` from stream
//! `(g << 32) | l`, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey([u64; 4]);

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn from_seed(seed: u64) -> Self {
        let mut state = seed;
        Self([
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
        ])
    }

    /// Derives a child key from integer tags. The result depends only on the
    /// parent key and the tag values, never on call order.
    pub fn derive(&self, tags: &[u64]) -> Self {
        let mut words = self.0;
        for (i, &tag) in tags.iter().enumerate() {
            for (j, w) in words.iter_mut().enumerate() {
                let mut state = *w ^ tag.rotate_left((7 * i + 13 * j) as u32) ^ ((i as u64) << 56);
                *w = splitmix64(&mut state);
            }
        }
        Self(words)
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(self.0) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(id);
        rng
    }
}

/// Stream id for offspring `l` of generation `g`.
pub fn offspring_stream(generation: u64, offspring: usize) -> u64 {
    (generation << 32) | offspring as u64
}

/// Stream id reserved for per-generation draws that are not tied to one offspring.
pub fn generation_stream(generation: u64) -> u64 {
    (generation << 32) | 0xFFFF_FFFF
}
