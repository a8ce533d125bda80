//! Deterministic seed derivation for per-task random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of identifiers (step, case, ensemble,
/// randomization, shot, ...) into an independent sub-seed.
pub fn derive_seed(master: u64, ids: &[u64]) -> u64 {
    ids.iter()
        .fold(splitmix(master), |acc, &id| splitmix(acc ^ splitmix(id.wrapping_add(0x632b_e59b_d9b4_e019))))
}

pub fn rng_for(master: u64, ids: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, ids))
}
