//! Product-matrix regenerating codes (MSR and MBR) over GF(2^8)/GF(2^16).
//!
//! The crate covers the full pipeline: finite-field arithmetic ([`galois`]),
//! dense matrix algebra ([`gfmatrix`]), product-matrix code construction and
//! validation ([`pm`]), linearization into generator-matrix form and
//! systematic transforms ([`linearize`]), the data-path codec with
//! single-node repair ([`codec`]), and file striping into per-node shards
//! ([`stripe`]).

pub mod codec;
pub mod galois;
pub mod gfmatrix;
pub mod linearize;
pub mod pm;
pub mod stats;
pub mod stripe;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field width {0} (expected 8 or 16)")]
    UnsupportedWidth(u32),
    #[error("division by zero in GF(2^w)")]
    DivisionByZero,
    #[error("region length mismatch: dst {dst} bytes, src {src} bytes")]
    RegionLength { dst: usize, src: usize },
    #[error("region length {len} is not a multiple of the {symbol}-byte symbol size")]
    RegionAlignment { len: usize, symbol: usize },
    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrices belong to different fields")]
    FieldMismatch,
    #[error("singular matrix: no nonzero pivot in column {column}")]
    Singular { column: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("duplicate row index {index}")]
    DuplicateRow { index: usize },
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires {expected:?} variant")]
    WrongVariant { expected: pm::Variant },
    #[error("k={k} outside the validated range 2..={max} for w={w}")]
    KOutOfRange { k: usize, w: u32, max: usize },
    #[error("degenerate construction: {0}")]
    DegeneratePoints(String),
    #[error("{count} subsets to check exceeds the exhaustive limit; rerun with explicit sampling")]
    TooManySubsets { count: u128 },
    #[error("construction invalid: {0}")]
    ConstructionInvalid(String),
    #[error("unrecoverable: {have} independent symbols available, {need} needed")]
    Unrecoverable { have: usize, need: usize },
    #[error("expected {need} blocks, got {have}")]
    BlockCount { have: usize, need: usize },
    #[error("bad block size {size}: {reason}")]
    BadBlockSize { size: usize, reason: String },
    #[error("invalid repair plan: {0}")]
    BadRepairPlan(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("bad shard header: {0}")]
    BadHeader(String),
    #[error("shard headers disagree: {0}")]
    HeaderMismatch(String),
    #[error("need {need} shards, only {have} usable")]
    InsufficientShards { have: usize, need: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
