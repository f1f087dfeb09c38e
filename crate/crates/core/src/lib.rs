//! Warp-granular sparse matrix kernels on a deterministic lockstep warp model.
//!
//! The crate is `no_std` (with `alloc`). It contains:
//!
//! * [`matrix`]: canonical COO/CSR storage, row statistics, synthetic
//!   generators and the sequential reference product every kernel is checked
//!   against.
//! * [`formats`]: the baseline GPU formats (ELL, HYB, segmented COO,
//!   CSR-vector and thread-per-row CSR).
//! * [`ellwarp`]: the sorted, per-warp padded, column-major interleaved
//!   layouts (K1 and the multi-lane K2), the `r`/`rs` renumbering transforms
//!   and their kernels.
//! * [`simt`]: the warp configuration, memory access tracer and the
//!   segment-transaction cost model.
//! * [`kernel`]: a registry that prepares any of the eleven kernels from a CSR
//!   matrix and runs it traced or untraced.
//! * [`solver`]: Jacobi-preconditioned conjugate gradient and the reorder
//!   break-even model.
//! * [`fem`]: an Aliev-Panfilov mono-domain finite element step with
//!   race-free assembly expressed as row sums over a warp layout.
//!
//! Everything that needs a clock, a file or a network lives in the
//! `warpell-lab` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ellwarp;
mod error;
pub mod fem;
pub mod formats;
pub mod kernel;
pub mod matrix;
pub mod simt;
pub mod solver;

pub use error::{Error, Result};
pub use kernel::{KernelId, KernelParams, PreparedSpmv};
pub use matrix::{MatrixStats, SparseCoo, SparseCsr};
pub use simt::{TransactionReport, WarpModelConfig};
