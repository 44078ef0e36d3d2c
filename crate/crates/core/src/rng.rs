//! Deterministic named random substreams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag for a substream; each purpose draws from an independent ChaCha stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    SoupCounts = 1,
    LoopChoice = 2,
    HoldingTimes = 3,
    Wilson = 4,
    Permutation = 5,
    Field = 6,
    Lift = 7,
    Spanning = 8,
    Gauge = 9,
    Experiment = 10,
}

pub fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 40) ^ index);
    rng
}

/// Seed for replica `r` of an experiment rooted at `seed` (splitmix64 finalizer).
pub fn replica_seed(seed: u64, r: u64) -> u64 {
    let mut z = seed ^ r.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
