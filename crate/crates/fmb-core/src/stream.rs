//! Deterministic RNG stream derivation.
//!
//! Every randomized stage derives its own ChaCha stream from the master seed
//! plus a small tuple of indices (vector index, circuit index, purpose tag).
//! Streams are independent of execution order, which makes sampling and
//! simulation embarrassingly parallel while keeping a single master seed in
//! charge of every artifact.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 step; the standard 64-bit mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a ChaCha12 stream from a master seed and a tag tuple.
pub fn derive(master: u64, tags: &[u64]) -> ChaCha12Rng {
    let mut state = master;
    let _ = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xd1342543de82ef95).rotate_left(17);
        let _ = splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
