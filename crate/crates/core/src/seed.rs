//! Seed derivation and the pseudo-random generator used everywhere.
//!
//! All randomness comes from [`Rng`], ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, which is stable across platforms. Per-task
//! seeds are derived from one top-level seed with [`derive_seed`]:
//!
//! | component                     | seed                                        |
//! |-------------------------------|---------------------------------------------|
//! | random extractor, example `i` | `derive_seed(seed, Stream::RandomExtract, i)` |
//! | bootstrap, metric `k`         | `derive_seed(seed, Stream::Bootstrap, k)`   |
//! | dataset split                 | `seed` unchanged                            |
//! | bootstrap resample `r`        | `bootstrap_seed.wrapping_add(r)`            |
//! | synthetic example `i`         | `derive_seed(seed, Stream::Fixture, i)`     |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RandomExtract = 1,
    Bootstrap = 2,
    Fixture = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ (stream as u64).rotate_left(32)) ^ index)
}
