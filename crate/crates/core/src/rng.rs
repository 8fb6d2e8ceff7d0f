//! Seed hierarchy: every stochastic component draws from its own stream,
//! derived from the run seed and a component label, so adding draws in one
//! component never reshuffles another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// FNV-1a over the label followed by a splitmix64 finalizer.
pub fn subseed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(seed ^ h)
}

pub fn indexed_subseed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix(subseed(seed, label) ^ splitmix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, label: &str) -> Rng {
    Rng::seed_from_u64(subseed(seed, label))
}

pub fn indexed_stream(seed: u64, label: &str, index: u64) -> Rng {
    Rng::seed_from_u64(indexed_subseed(seed, label, index))
}
