//! Named seed derivation.
//!
//! Every random stream in the crate is obtained from a master seed, a
//! component label and an index. Streams for different `(label, index)`
//! pairs are independent ChaCha8 instances, so work can be split across
//! threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for stream `index` of component `label` under `master`.
pub fn derive(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(label)) ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Generator for stream `index` of component `label`.
pub fn stream(master: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(master, label, index))
}
