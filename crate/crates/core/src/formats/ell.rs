use alloc::vec;
use alloc::vec::Vec;

use super::check_len;
use crate::matrix::{SparseCoo, SparseCsr};
use crate::simt::{AccessKind, NoTrace, Space, Tracer, INDEX_BYTES, VALUE_BYTES};
use crate::Result;

/// ELLPACK: every row padded to `width` slots, stored column-major.
///
/// Slot `j` of row `r` lives at `j * nrows + r`. Padding slots hold value 0.0
/// and column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EllLayout {
    pub nrows: usize,
    pub ncols: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub col_indices: Vec<usize>,
    /// Stored (non-padding) entries per row.
    pub row_lens: Vec<usize>,
}

impl EllLayout {
    pub fn stored_slots(&self) -> usize {
        self.nrows * self.width
    }

    pub fn nnz(&self) -> usize {
        self.row_lens.iter().sum()
    }

    pub fn padded_slots(&self) -> usize {
        self.stored_slots() - self.nnz()
    }

    /// Stored `(row, col, value)` triples, row by row.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (0..self.row_lens[r]).map(move |j| {
                let k = j * self.nrows + r;
                (r, self.col_indices[k], self.values[k])
            })
        })
    }
}

/// ELL with width equal to the longest row.
pub fn build_ell(m: &SparseCsr) -> EllLayout {
    build_ell_with_width(m, m.max_row_len()).0
}

/// ELL truncated to `width`; entries beyond it are returned as a row-sorted COO tail.
pub fn build_ell_with_width(m: &SparseCsr, width: usize) -> (EllLayout, SparseCoo) {
    let nrows = m.nrows();
    let mut values = vec![0.0; nrows * width];
    let mut col_indices = vec![0usize; nrows * width];
    let mut row_lens = Vec::with_capacity(nrows);
    let mut tail = SparseCoo::new(nrows, m.ncols());
    for r in 0..nrows {
        let (cols, vals) = m.row(r);
        let kept = cols.len().min(width);
        for j in 0..kept {
            values[j * nrows + r] = vals[j];
            col_indices[j * nrows + r] = cols[j];
        }
        for j in kept..cols.len() {
            tail.push(r, cols[j], vals[j]).expect("indices come from a valid csr");
        }
        row_lens.push(kept);
    }
    let ell = EllLayout {
        nrows,
        ncols: m.ncols(),
        width,
        values,
        col_indices,
        row_lens,
    };
    (ell, tail)
}

pub fn spmv_ell(l: &EllLayout, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.nrows];
    spmv_ell_traced(l, x, &mut y, 32, &mut NoTrace)?;
    Ok(y)
}

/// One lane per row, warps of `warp_size` consecutive rows, `width` steps each.
pub fn spmv_ell_traced<T: Tracer>(
    l: &EllLayout,
    x: &[f64],
    y: &mut [f64],
    warp_size: usize,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.ncols, x.len())?;
    check_len(l.nrows, y.len())?;
    let mut acc = vec![0.0; warp_size];
    let mut idx: Vec<usize> = Vec::with_capacity(warp_size);
    let mut xs: Vec<usize> = Vec::with_capacity(warp_size);
    for first in (0..l.nrows).step_by(warp_size.max(1)) {
        let active = warp_size.min(l.nrows - first);
        acc[..active].fill(0.0);
        for j in 0..l.width {
            let base = j * l.nrows + first;
            for (lane, a) in acc[..active].iter_mut().enumerate() {
                let k = base + lane;
                *a += l.values[k] * x[l.col_indices[k]];
            }
            if T::ENABLED {
                idx.clear();
                idx.extend(base..base + active);
                xs.clear();
                xs.extend(idx.iter().map(|&k| l.col_indices[k]));
                tracer.warp_step();
                tracer.access(Space::MatrixValues, AccessKind::Load, VALUE_BYTES, &idx);
                tracer.access(Space::ColIndices, AccessKind::Load, INDEX_BYTES, &idx);
                tracer.access(Space::XVector, AccessKind::Load, VALUE_BYTES, &xs);
            }
        }
        y[first..first + active].copy_from_slice(&acc[..active]);
        if T::ENABLED {
            idx.clear();
            idx.extend(first..first + active);
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, &idx);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::spmv_csr_reference;

    fn rows_3_1_2() -> SparseCsr {
        SparseCsr::new(
            3,
            3,
            vec![0, 3, 4, 6],
            vec![0, 1, 2, 1, 0, 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap()
    }

    #[test]
    fn padding_from_definition() {
        let l = build_ell(&rows_3_1_2());
        assert_eq!(l.width, 3);
        assert_eq!(l.padded_slots(), 3);
        // column-major placement
        assert_eq!(l.values[1], 4.0);
        assert_eq!(l.values[3], 2.0);
    }

    #[test]
    fn matches_reference() {
        let m = rows_3_1_2();
        let x = [1.0, -2.0, 0.5];
        assert_eq!(
            spmv_ell(&build_ell(&m), &x).unwrap(),
            spmv_csr_reference(&m, &x).unwrap()
        );
    }

    #[test]
    fn identity_returns_x() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(spmv_ell(&build_ell(&SparseCsr::identity(5)), &x).unwrap(), x);
    }

    #[test]
    fn padding_contributes_zero_for_huge_x0() {
        let m = rows_3_1_2();
        let x = [1e300, 1.0, 1.0];
        let y = spmv_ell(&build_ell(&m), &x).unwrap();
        // row 1 has one entry at column 1, two padding slots pointing at x[0]
        assert_eq!(y[1], 4.0);
        let x = [-1e300, 1.0, 1.0];
        assert_eq!(spmv_ell(&build_ell(&m), &x).unwrap()[1], 4.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(spmv_ell(&build_ell(&rows_3_1_2()), &[1.0]).is_err());
    }
}
