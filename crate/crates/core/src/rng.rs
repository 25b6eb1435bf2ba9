//! Counter-based seeding.
//!
//! Every random stream is addressed by a path of counters below the master
//! seed, e.g. `[point, drop, STREAM_TRIALS, trial, attempt]`. The path is folded
//! through SplitMix64 into a single 64-bit ChaCha seed, so a stream depends only
//! on its address and never on which worker consumed it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used as the third path element so unrelated consumers of the
/// same drop never collide.
pub const STREAM_USERS: u64 = 1;
pub const STREAM_NODES: u64 = 2;
pub const STREAM_SCHEDULE: u64 = 3;
pub const STREAM_TRIALS: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `master` and returns the derived 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn stream(master: u64, path: &[u64]) -> SimRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
