//! Keyed random streams.
//!
//! Every consumer of randomness asks for a stream by `(seed, purpose, index)`.
//! Streams never overlap, so a path or sample block can be regenerated on its
//! own, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The discriminant occupies the top 16 bits of
/// the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Purpose {
    Market = 1,
    Defaults = 2,
    Population = 3,
    FundAlpha = 4,
    PutOracle = 5,
    JointLoss = 6,
    Exits = 7,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 48));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | index);
    rng
}
