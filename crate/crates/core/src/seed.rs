//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! 64-bit root seed, a module tag and a sample index:
//!
//! * the key is `splitmix64(root ^ fnv1a(tag))`, so distinct modules never
//!   share a key even with the same root seed;
//! * the ChaCha stream number is the sample index, so sample `k` is the same
//!   whether samples are drawn serially or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Module tags used for seed splitting.
pub mod tag {
    pub const ENSEMBLE: &str = "ensemble";
    pub const GUE_ORACLE: &str = "gue-oracle";
    pub const POISSON_ORACLE: &str = "poisson-oracle";
    pub const DET_RATIO: &str = "det-ratio";
    pub const BOSONIZATION: &str = "bosonization";
    pub const BEREZIN: &str = "berezin";
    pub const COVARIANCE_CHECK: &str = "covariance-check";
}

/// Root seed plus the module tag it is specialised to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for sample `index` of the stream labelled `tag`.
    pub fn stream(self, tag: &str, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.0 ^ fnv1a(tag)));
        rng.set_stream(index);
        rng
    }

    /// Derived 64-bit token identifying one sample, recorded alongside it.
    pub fn token(self, tag: &str, index: u64) -> u64 {
        splitmix64(splitmix64(self.0 ^ fnv1a(tag)) ^ index)
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
