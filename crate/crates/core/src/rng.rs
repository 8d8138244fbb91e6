//! Seeded random streams.
//!
//! Every stochastic routine takes a caller-owned generator. Independent jobs
//! (replicates, Monte Carlo draws, segments) derive their own generator from a
//! master seed plus a tag and an index, so results do not depend on the order
//! in which jobs run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Documented default master seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 12345;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator seeded directly from `seed`.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for job `index` of kind `tag` under `seed`.
pub fn substream(seed: u64, tag: &str, index: u64) -> Rng {
    let mut h = splitmix64(seed);
    for b in tag.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    h = splitmix64(h ^ index);
    ChaCha8Rng::seed_from_u64(h)
}
