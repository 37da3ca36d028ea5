//! Seeded, portable random draws.
//!
//! Every draw is defined in terms of ChaCha20 `next_u64` output so that a
//! given seed can be replayed in another language.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Recorded in dataset manifests next to the seed.
pub const SAMPLER_ALGORITHM: &str = "chacha20: key = seed as u64 little-endian zero-padded to 32 bytes, \
stream = 0, word = next_u64; below(n) = rejection of words > u64::MAX - ((u64::MAX % n + 1) % n), then word % n; \
sample(k of n) = partial Fisher-Yates over 0..n, swapping i with i + below(n - i) for i in 0..k";

pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream under the same key, used for parallel batches.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        SeededRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let reject = (u64::MAX % n + 1) % n;
        loop {
            let word = self.inner.next_u64();
            if word <= u64::MAX - reject {
                return (word % n) as usize;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        for i in 0..n.saturating_sub(1) {
            let j = i + self.below(n - i);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in draw order.
    pub fn sample(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut indices: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            indices.swap(i, j);
        }
        indices.truncate(k);
        indices
    }
}
