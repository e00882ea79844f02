//! Deterministic random-number streams.
//!
//! Every stochastic routine takes an explicit generator; replicated
//! experiments derive one independent stream per (master seed, index...)
//! tuple so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 step, used only to expand seeds.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A generator for the stream identified by `(master, path...)`.
///
/// The path is hashed into the seed, so streams for distinct paths are
/// independent for practical purposes and reproducible across runs,
/// platforms, and thread counts.
pub fn stream_rng(master: u64, path: &[u64]) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    let mut s = derive_seed(master, path);
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// Collapse `(master, path...)` into a single derived seed; used when a
/// sub-experiment needs its own master.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut mixed = splitmix64(&mut state);
    for &component in path {
        state ^= component.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        mixed = splitmix64(&mut state);
    }
    mixed
}
