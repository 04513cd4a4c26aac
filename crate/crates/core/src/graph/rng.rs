//! Hierarchical random streams.
//!
//! Every random draw in the crate comes from a [`StreamKey`]: a master seed
//! plus a path of integers naming a sub-stream (replicate index, stage, ...).
//! The key is hashed into a ChaCha seed, so two keys with different paths
//! give independent generators and the same key always gives the same one,
//! whatever order replicates are evaluated in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    seed: u64,
    path: Vec<u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Key for the sub-stream `index` below this one.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self { seed: self.seed, path }
    }

    /// Shorthand for a chain of [`child`](Self::child) calls.
    pub fn descend(&self, indices: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        Self { seed: self.seed, path }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        // Length is mixed in first so that a path is never a prefix-collision
        // of a longer one.
        let mut state = splitmix64(self.seed ^ splitmix64(self.path.len() as u64));
        for &p in &self.path {
            state = splitmix64(state ^ splitmix64(p.wrapping_add(0xA076_1D64_78BD_642F)));
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let k = StreamKey::new(7).descend(&[1, 2, 3]);
        let a: Vec<u64> = (0..8).map(|_| k.rng().random()).collect();
        let mut r1 = k.rng();
        let mut r2 = k.clone().rng();
        let b: Vec<u64> = (0..8).map(|_| r1.random()).collect();
        let c: Vec<u64> = (0..8).map(|_| r2.random()).collect();
        assert_eq!(b, c);
        assert_eq!(a[0], b[0]);
    }

    #[test]
    fn distinct_paths_differ() {
        let root = StreamKey::new(7);
        let mut seen = std::collections::HashSet::new();
        for key in [
            root.clone(),
            root.child(0),
            root.child(1),
            root.child(0).child(0),
            root.descend(&[1, 0]),
            StreamKey::new(8),
        ] {
            let v: u64 = key.rng().random();
            assert!(seen.insert(v), "collision for {key:?}");
        }
    }

    #[test]
    fn descend_matches_child_chain() {
        let root = StreamKey::new(3);
        assert_eq!(root.descend(&[4, 5]), root.child(4).child(5));
    }
}
