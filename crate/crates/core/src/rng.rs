//! Seeded random streams.
//!
//! Every randomized operation draws from a ChaCha8 generator keyed by
//! `(seed, stream)`: the seed is expanded with `SeedableRng::seed_from_u64`
//! (PCG32-based expansion) and the stream id selects one of ChaCha's 2^64
//! independent streams. Results are therefore reproducible from the seed and
//! an operation-specific stream constant, independent of call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_SPLIT: u64 = 0x5350_4c49_0000_0000;
pub const STREAM_NOISE: u64 = 0x4e4f_4953_0000_0000;
pub const STREAM_SOLVER: u64 = 0x534f_4c56_0000_0000;
pub const STREAM_SYNTH: u64 = 0x5359_4e54_0000_0000;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer over `(master, index)`, used to derive per-trial seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
