//! Shared fixtures for the benchmark suite.

use perred_core::finitefield::PrimeFieldCtx;

/// Largest five-digit prime: big enough to exercise the hot paths, small
/// enough that a full brute-force pass stays well under a millisecond.
pub const P_MEDIUM: u64 = 99_991;

pub fn medium_ctx() -> PrimeFieldCtx {
    PrimeFieldCtx::new(P_MEDIUM).expect("odd prime")
}
