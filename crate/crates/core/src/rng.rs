//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream addressed by
//! `(seed, stage, replicate)`. Replicates therefore produce the same values
//! whichever thread runs them and in whatever order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes that may share one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Generate = 1,
    Null = 2,
    BootstrapOuter = 3,
    BootstrapInner = 4,
    BootstrapScale = 5,
    Reproduce = 6,
    BetaCopula = 7,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for one `(stage, replicate)` cell of a seed.
pub fn substream(seed: u64, stage: Stage, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stage as u64)));
    rng.set_stream(replicate);
    rng
}

/// Derives a child seed, for nesting one seeded procedure inside another.
pub fn child_seed(seed: u64, stage: Stage, replicate: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stage as u64)) ^ splitmix64(replicate.wrapping_add(0xA5A5)))
}
