//! Counter-based random streams.
//!
//! A stream is identified by the root seed, a name and a path of indices
//! (for example `("particle", [generation, index])`). The generator for a
//! stream depends on nothing else, so trials can be evaluated in any order
//! or in parallel and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 256-bit key of a named stream.
pub fn stream_key(seed: u64, name: &str, path: &[u64]) -> [u8; 32] {
    let mut state = mix64(seed) ^ mix64(fnv1a(name.as_bytes()));
    for (depth, &index) in path.iter().enumerate() {
        state = mix64(state ^ mix64(index ^ mix64(depth as u64 + 1)));
    }
    let mut key = [0u8; 32];
    for (lane, chunk) in key.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix64(state ^ lane as u64).to_le_bytes());
    }
    key
}

/// Generator for the stream `(seed, name, path)`.
pub fn stream_rng(seed: u64, name: &str, path: &[u64]) -> StreamRng {
    ChaCha8Rng::from_seed(stream_key(seed, name, path))
}
