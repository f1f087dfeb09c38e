//! Canonical sparse storage and the reference product.

mod coo;
mod csr;
pub mod generate;
mod reference;
mod stats;

pub use coo::{coo_to_csr, SparseCoo};
pub use csr::{CsrView, SparseCsr};
pub use generate::{generate_synthetic, laplacian3d, SyntheticKind};
pub use reference::{spmv_csr_reference, spmv_magnitude, within_spmv_tolerance};
pub use stats::{matrix_stats, MatrixStats, BYTES_PER_NONZERO};
