//! Keyed random streams.
//!
//! A [`StreamKey`] is a master seed plus a path of integer keys. Each distinct
//! path maps to an independent ChaCha8 stream, so work split across batch rows,
//! Pauli terms or shift signs draws the same numbers however it is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(splitmix(seed))
    }

    /// Substream `k` of this stream.
    pub fn child(self, k: u64) -> Self {
        StreamKey(splitmix(self.0 ^ splitmix(k.wrapping_add(0x632B_E59B_D9B4_E019))))
    }

    /// Raw 64-bit identity of the stream, usable as a seed elsewhere.
    pub fn id(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (i, chunk) in seed.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&splitmix(self.0.wrapping_add(i as u64)).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
