//! Deterministic seed splitting.
//!
//! All randomness derives from a single master seed. Each consumer asks for a
//! generator by `(stream, index)`, so work items get the same generator no
//! matter which thread runs them or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named sub-streams of the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Stage1Chain = 1,
    Stage1Select = 2,
    Realization = 3,
    Stage2Chain = 4,
    Stage2Select = 5,
    GammaDraw = 6,
    CurveDraw = 7,
    ScenarioParams = 8,
    ScenarioNoise = 9,
    Repeat = 10,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed for `(stream, index)` from `seed`.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(seed ^ splitmix64(stream as u64));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn sub_rng(seed: u64, stream: Stream, index: u64) -> Rng {
    rng_from_seed(derive_seed(seed, stream, index))
}
