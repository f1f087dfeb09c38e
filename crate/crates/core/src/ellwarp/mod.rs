//! Sorted, per-warp padded, column-major interleaved layouts.
//!
//! Rows are sorted longest first and cut into warp-sized groups; each group
//! is padded only to its own longest row and stored so that lane `i`'s slot
//! `j` sits at `warp_offset + j * warp_size + i`. K1 gives every row one
//! lane. K2 gives long rows a power-of-two number of lanes bounded by a
//! per-lane slot threshold and combines them with an in-warp tree reduction.
//!
//! The `r` transform renumbers columns (and `x`) with the row permutation so
//! that results come out in sorted numbering without a scattered store; `rs`
//! additionally re-sorts every row by its new column numbers.

mod dump;
mod k1;
mod k2;
mod padding;
mod perm;
mod reorder;

pub use dump::{dump_k1, dump_k2};
pub use k1::{
    build_k1, build_k1_row_major, build_k1_unsorted, build_k1_with_order, build_k1r,
    rowsum_k1_traced, spmv_k1, spmv_k1_traced, spmv_k1r, DataOrder, StoreMode, WarpLayoutK1,
};
pub use k2::{
    build_k2, build_k2_with_order, build_k2r, compute_k2_lanes, spmv_k2, spmv_k2_traced,
    spmv_k2r, WarpLayoutK2,
};
pub use padding::{padding_difference_percentage, padding_report, Padded, PaddingReport};
pub use perm::{sort_rows_desc, sort_rows_desc_view, Permutation};
pub use reorder::{make_reordered_r, make_reordered_rs, ReorderVariant, ReorderedOperand};

/// Rounds `offset` up to a multiple of `align`.
pub(crate) fn align_up(offset: usize, align: usize) -> usize {
    offset.div_ceil(align) * align
}
