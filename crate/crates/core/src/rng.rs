//! Seed derivation for reproducible, order-independent sampling.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by
//! `(master seed, domain, index)`. ChaCha is counter based, so a stream can be
//! opened directly at any index without touching the others; replicate `k`
//! therefore produces the same draw whether it runs first, last, or on
//! another thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream domains. Distinct domains never share a key stream.
pub mod domain {
    pub const DEFORMED_GOE: u64 = 0x474f_455f_4445_4631;
    pub const SPIKED: u64 = 0x5350_494b_4544_5f31;
    pub const NET_SPHERE: u64 = 0x4e45_545f_5350_4831;
    pub const COVERAGE: u64 = 0x434f_5645_5241_4731;
    pub const PROBE: u64 = 0x5052_4f42_455f_5631;
    pub const CHI_SQUARE: u64 = 0x4348_4932_5441_4c31;
    pub const INTERLACING: u64 = 0x494e_5445_524c_4131;
    pub const LIFT: u64 = 0x4c49_4654_5f58_5f31;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A master seed from which independent per-purpose streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Opens stream `index` of `domain`.
    pub fn stream(&self, domain: u64, index: u64) -> ChaCha8Rng {
        let key = splitmix64(self.master ^ splitmix64(domain));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        rng
    }
}
