//! Counter-based random substreams.
//!
//! Every user owns two ChaCha streams keyed by `(master seed, user index)`:
//! one drives the environment (threshold draw, feedback reveals), the other
//! the learner's own coin flips. Results do not depend on which worker
//! simulates which user, or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn substream(master: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

pub fn env_stream(master: u64, user: u64) -> Stream {
    substream(master, user.wrapping_mul(2))
}

pub fn learner_stream(master: u64, user: u64) -> Stream {
    substream(master, user.wrapping_mul(2).wrapping_add(1))
}

/// SplitMix64 finalizer; maps `(seed, run)` to a well-mixed run seed.
pub fn derive_seed(seed: u64, run: u64) -> u64 {
    let mut z = seed ^ run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
