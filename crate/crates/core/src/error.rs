//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Density or normalized measure over an empty vertex set.
    #[error("empty side: density/measure undefined")]
    EmptySide,

    /// Two objects live over different ground sets.
    #[error("ground sets do not match: {0}")]
    GroundMismatch(String),

    /// Shattering check requested for a test set beyond the enumeration guard.
    #[error("test set of size {size} exceeds the shatter-check guard ({cap})")]
    TooLargeToShatterCheck { size: usize, cap: usize },

    /// Sauer–Shelah formula evaluated outside its precondition 1 ≤ d ≤ |I|.
    #[error("sauer_shelah_bound requires 1 <= d <= set_size, got d={d}, set_size={set_size}")]
    Domain { d: usize, set_size: usize },

    /// Exact regularity tester asked to enumerate a block beyond its cap.
    #[error("block of size {size} exceeds the exact tester cap ({cap})")]
    TooLargeForExact { size: usize, cap: usize },

    /// Witness amplification produced an empty core set, meaning the
    /// witness did not satisfy the density-surplus precondition.
    #[error("witness amplification degenerated: {0}")]
    DegenerateWitness(&'static str),

    /// Invalid partition structure (overlap, gap, or empty block).
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// Invalid generator specification.
    #[error("invalid family spec: {0}")]
    Spec(String),

    /// Malformed graph or partition file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Duplicate edge in input.
    #[error("duplicate edge ({x}, {y})")]
    DuplicateEdge { x: usize, y: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
