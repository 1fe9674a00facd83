//! Harness side of the `pmrc` binary: benchmark runner, block-size sweeps,
//! sparsity reporting, and the Reed-Solomon baseline used for ratio context.

pub mod bench;
pub mod rs;
