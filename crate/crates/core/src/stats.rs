//! Per-thread instrumentation counters.
//!
//! Benchmarks split running time into an initialization phase (matrix builds
//! and inversions) and an apply phase (pure region arithmetic). These
//! counters make that split observable in tests: an apply phase must not
//! perform matrix inversions, and identity fast paths must not multiply.
//! Counters are thread-local so concurrent tests do not disturb each other.

use std::cell::Cell;

thread_local! {
    static MATRIX_INVERSIONS: Cell<u64> = const { Cell::new(0) };
    static REGION_MULS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn record_inversion() {
    MATRIX_INVERSIONS.with(|c| c.set(c.get() + 1));
}

/// Counted once per region multiply-accumulate with a coefficient other than
/// 0 or 1 (c=0 is a no-op, c=1 is a plain XOR).
pub(crate) fn record_region_mul() {
    REGION_MULS.with(|c| c.set(c.get() + 1));
}

/// Matrix inversions performed by the calling thread so far.
pub fn inversion_count() -> u64 {
    MATRIX_INVERSIONS.with(|c| c.get())
}

/// Region multiplications (coefficient > 1) performed by the calling thread.
pub fn region_mul_count() -> u64 {
    REGION_MULS.with(|c| c.get())
}
