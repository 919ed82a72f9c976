//! Counter-keyed random streams.
//!
//! Every random draw in the crate comes from a stream identified by a master
//! seed plus a path of integer keys (stream tag, replicate index, segment
//! bounds, ...). Streams are independent of the order in which they are
//! created, so parallel schedules reproduce sequential results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Distinct tags keep logically separate draws apart even when
/// they share a master seed and index.
pub mod tag {
    pub const REGRESSOR: u64 = 0x5245_4752;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const PERMUTATION: u64 = 0x5045_524d;
    pub const REPLICATION: u64 = 0x5245_504c;
    pub const SEGMENT: u64 = 0x5345_474d;
}

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a key path into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &key| splitmix64(acc ^ splitmix64(key)))
}

/// Generator for the stream at `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_path_sensitive() {
        let a = derive_seed(7, &[tag::PERMUTATION, 0]);
        let b = derive_seed(7, &[tag::PERMUTATION, 1]);
        let c = derive_seed(7, &[tag::NOISE, 0]);
        let d = derive_seed(8, &[tag::PERMUTATION, 0]);
        assert!(a != b && a != c && a != d && b != c);
        // order of keys matters
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
    }

    #[test]
    fn streams_are_reproducible() {
        let xs: Vec<u64> = stream(42, &[1, 2]).random_iter().take(8).collect();
        let ys: Vec<u64> = stream(42, &[1, 2]).random_iter().take(8).collect();
        assert_eq!(xs, ys);
    }
}
