//! Counter-based random streams.
//!
//! Every unit of Monte Carlo work draws from `stream(seed, task_index)`, so the
//! numbers a task sees depend only on its index and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples drawn from one stream before moving to the next task index.
pub const CHUNK: usize = 1024;

/// Domain tags keep unrelated consumers of the same user seed apart.
pub mod tag {
    pub const SPHERE: u64 = 0x5350_4845;
    pub const BALL: u64 = 0x4241_4c4c;
    pub const GRASSMANNIAN: u64 = 0x4752_4153;
    pub const CUBE: u64 = 0x4355_4245;
    pub const PILOT: u64 = 0x5049_4c4f;
    pub const POSITIVITY: u64 = 0x504f_5349;
    pub const MEMBER: u64 = 0x4d45_4d42;
    pub const PRODUCT: u64 = 0x5052_4f44;
    pub const RADIUS: u64 = 0x5241_4449;
    pub const FRAME_TASK: u64 = 0x4652_4d54;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from `(seed, tag)`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag.rotate_left(17)))
}

/// The generator for task `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(index);
    rng
}

/// Number of chunks needed to cover `count` samples.
pub fn chunks(count: usize) -> usize {
    count.div_ceil(CHUNK)
}

/// Sample range `[start, end)` covered by chunk `c`.
pub fn chunk_range(c: usize, count: usize) -> std::ops::Range<usize> {
    let start = c * CHUNK;
    start..(start + CHUNK).min(count)
}
