//! Per-replication seed derivation.
//!
//! Every Monte Carlo replication draws from its own generator whose seed is
//! a hash of the master seed, a stream tag and the replication index. Results
//! therefore do not depend on how replications are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags keep calibration, checking and evaluation draws disjoint.
pub mod stream {
    pub const MIXTURE: u64 = 0x6d69_7874;
    pub const CHECK: u64 = 0x6368_6563;
    pub const FRESH: u64 = 0x6672_6573;
    pub const POWER: u64 = 0x706f_7765;
    pub const BASELINE: u64 = 0x6261_7365;
    pub const BOOTSTRAP: u64 = 0x626f_6f74;
    pub const LIMIT: u64 = 0x6c69_6d69;
    pub const SURFACE: u64 = 0x7375_7266;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with an arbitrary path of tags and indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(master: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(master, path))
}
