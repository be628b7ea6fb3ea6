//! Counter-based stream derivation for reproducible parallel Monte Carlo.
//!
//! Every random draw in the engine comes from a ChaCha stream whose 256-bit
//! seed is derived purely from (master_seed, run_index, timestep), so results
//! are independent of scheduling and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; full-period bijective mixer.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the deterministic stream for (master_seed, run, timestep).
pub fn stream(master_seed: u64, run: u64, timestep: u64) -> ChaCha8Rng {
    let mut state = master_seed;
    let mut seed = [0u8; 32];
    let a = splitmix64(&mut state);
    state ^= run.wrapping_mul(0xA24B_AED4_963E_E407);
    let b = splitmix64(&mut state);
    state ^= timestep.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    for (chunk, word) in seed.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Derive a sub-master seed for an indexed work item (e.g. one sweep point).
pub fn derive_seed(master_seed: u64, tag: u64, index: u64) -> u64 {
    let mut state = master_seed ^ tag.rotate_left(32);
    state ^= index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut state)
}
