//! Baseline GPU formats and their lockstep kernels.
//!
//! Each kernel has an untraced convenience entry point and a `_traced`
//! variant generic over [`Tracer`](crate::simt::Tracer).

mod coo;
mod csr_scalar;
mod csr_vector;
mod ell;
mod hyb;

pub use coo::{spmv_coo_segmented, spmv_coo_segmented_traced};
pub use csr_scalar::spmv_csr_scalar_traced;
pub use csr_vector::{spmv_csr_vector, spmv_csr_vector_traced};
pub use ell::{build_ell, build_ell_with_width, spmv_ell, spmv_ell_traced, EllLayout};
pub use hyb::{build_hyb, default_hyb_width, spmv_hyb, spmv_hyb_traced, HybLayout};

use crate::{Error, Result};

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
