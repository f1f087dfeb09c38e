use alloc::string::String;

/// Errors produced by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry ({row}, {col}) is out of bounds for a {nrows}x{ncols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("COO entries are not sorted by row (first violation at entry {0})")]
    UnsortedEntries(usize),

    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mixed access kinds or spaces in one warp step")]
    MixedWarpStep,

    #[error("solver diverged at iteration {iteration} (relative residual {relative_residual:e})")]
    Diverged {
        iteration: usize,
        relative_residual: f64,
    },

    #[error("source term singular: mu2 + phi = {0:e}")]
    Singular(f64),

    #[error(
        "local Newton did not converge in {iterations} iterations (last r = {last}, residual {residual:e})"
    )]
    LocalNewton {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("outer Newton did not converge in {iterations} iterations (relative residual {relative_residual:e})")]
    OuterNewton {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("degenerate element {element} (signed volume {volume:e})")]
    DegenerateElement { element: usize, volume: f64 },

    #[error("kernel {kernel} cannot run on this matrix: {reason}")]
    Incompatible { kernel: String, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;
