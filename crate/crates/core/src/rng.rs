//! Minimal splitmix64 generator.
//!
//! Everything in this crate that samples (subgroup generator search, random
//! functional graphs) must be reproducible bit-for-bit across runs, platforms
//! and worker counts.  Splitmix64 is tiny, has no shared state, and lets each
//! consumer derive an independent stream from a `(seed, index)` pair, so
//! results never depend on evaluation order.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream `index` derived from `seed`; distinct indices give independent
    /// streams regardless of how many values each one consumes.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut boot = SplitMix64::new(seed ^ index.wrapping_mul(0xa076_1d64_78bd_642f));
        let s = boot.next_u64();
        SplitMix64::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, n)`.  The modulo bias is below `n / 2^64`, far
    /// beyond anything the statistical consumers here can resolve.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }
}
