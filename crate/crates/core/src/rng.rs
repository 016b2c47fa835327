//! Reproducible random streams.
//!
//! A stream is identified by `(base_seed, tag, index)`. The 256-bit ChaCha8
//! key is derived from `base_seed` and the FNV-1a hash of `tag` through a
//! SplitMix64 expansion; `index` selects the ChaCha stream (64-bit nonce).
//! Distinct indices under one key are non-overlapping keystreams of 2^64
//! blocks each, so replications never share random words.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A family of streams sharing one `(base_seed, tag)` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    base_seed: u64,
    tag_hash: u64,
}

impl StreamFamily {
    pub fn new(base_seed: u64, tag: &str) -> Self {
        StreamFamily {
            base_seed,
            tag_hash: fnv1a(tag.as_bytes()),
        }
    }

    /// Derive a sub-family; `child(a).child(b)` differs from `child(b).child(a)`.
    pub fn child(&self, tag: &str) -> Self {
        let mut h = self.tag_hash;
        for b in tag.as_bytes() {
            h = (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME);
        }
        // separator so that child("ab") != child("a").child("b")
        h = (h ^ 0xff).wrapping_mul(FNV_PRIME);
        StreamFamily {
            base_seed: self.base_seed,
            tag_hash: h,
        }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream(&self, index: u64) -> RngStream {
        let mut state = self.base_seed ^ self.tag_hash.rotate_left(29);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(index);
        RngStream { inner }
    }
}

/// Single-owner deterministic random source.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(base_seed: u64, tag: &str, index: u64) -> Self {
        StreamFamily::new(base_seed, tag).stream(index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
