//! Seed derivation. Every stochastic unit of work (a Monte Carlo round, a
//! synthetic message, a shuffle) gets its own generator seeded from
//! `(master seed, stream index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type SimRng = Pcg64Mcg;

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(
        mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15))
            ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03),
    )
}

pub fn stream_rng(master: u64, stream: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream))
}
