use alloc::vec;
use alloc::vec::Vec;

use super::{build_ell_with_width, check_len, spmv_coo_segmented_traced, spmv_ell_traced, EllLayout};
use crate::matrix::{SparseCoo, SparseCsr};
use crate::simt::{NoTrace, Tracer};
use crate::Result;

/// ELL part of width `k_ell` plus a row-sorted COO tail for the overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct HybLayout {
    pub ell: EllLayout,
    pub coo_tail: SparseCoo,
}

impl HybLayout {
    pub fn stored_slots(&self) -> usize {
        self.ell.stored_slots() + self.coo_tail.nnz()
    }

    pub fn padded_slots(&self) -> usize {
        self.ell.padded_slots()
    }
}

pub fn build_hyb(m: &SparseCsr, k_ell: usize) -> HybLayout {
    let (ell, coo_tail) = build_ell_with_width(m, k_ell);
    HybLayout { ell, coo_tail }
}

/// Smallest width that holds at least two thirds of the rows completely.
pub fn default_hyb_width(m: &SparseCsr) -> usize {
    let mut lens: Vec<usize> = m.row_lengths().collect();
    if lens.is_empty() {
        return 0;
    }
    lens.sort_unstable();
    let covered = (2 * lens.len()).div_ceil(3);
    lens[covered.max(1) - 1]
}

pub fn spmv_hyb(l: &HybLayout, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.ell.nrows];
    spmv_hyb_traced(l, x, &mut y, 32, &mut NoTrace)?;
    Ok(y)
}

/// ELL pass writes `y`, then the COO pass accumulates into it.
pub fn spmv_hyb_traced<T: Tracer>(
    l: &HybLayout,
    x: &[f64],
    y: &mut [f64],
    warp_size: usize,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.ell.nrows, y.len())?;
    spmv_ell_traced(&l.ell, x, y, warp_size, tracer)?;
    if l.coo_tail.nnz() > 0 {
        spmv_coo_segmented_traced(&l.coo_tail, x, y, warp_size, true, tracer)?;
    }
    Ok(())
}
