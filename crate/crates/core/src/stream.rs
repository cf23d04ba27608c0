//! Deterministic random substreams for the Monte Carlo engine.
//!
//! Every random draw in a simulation comes from a ChaCha8 stream whose seed is
//! derived from `(master seed, trial, round, lane)` through chained SplitMix64
//! finalizers. Work can then be split across threads in any way without
//! changing a single draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a substream is used for within one `(trial, round)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    /// Database contents (drawn once per trial, at round 0).
    Database,
    /// Shift targets and known-position picks.
    Control,
    /// Key material and attacker observations for one block of key positions
    /// of one key segment.
    Block { segment: u32, block: u32 },
}

impl Lane {
    fn tag(self) -> u64 {
        match self {
            Lane::Database => 0,
            Lane::Control => 1,
            Lane::Block { segment, block } => {
                (2 << 56) | (u64::from(segment) << 32) | u64::from(block)
            }
        }
    }
}

pub fn substream_seed(seed: u64, trial: u64, round: u64, lane: Lane) -> u64 {
    let mut h = splitmix64(seed);
    for word in [trial, round, lane.tag()] {
        h = splitmix64(h ^ word);
    }
    h
}

pub fn substream(seed: u64, trial: u64, round: u64, lane: Lane) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, trial, round, lane))
}
