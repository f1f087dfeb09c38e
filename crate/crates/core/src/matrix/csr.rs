use alloc::format;
use alloc::vec::Vec;

use super::SparseCoo;
use crate::{Error, Result};

/// Canonical compressed sparse row matrix.
///
/// Invariants: `row_offsets` has `nrows + 1` nondecreasing entries starting
/// at 0 and ending at `nnz`; within each row the column indices are strictly
/// increasing and below `ncols`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCsr {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCsr {
    /// Validates and wraps raw CSR arrays.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        validate(nrows, ncols, &row_offsets, &col_indices, &values, true)?;
        Ok(Self::from_parts_unchecked(
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert!(validate(nrows, ncols, &row_offsets, &col_indices, &values, true).is_ok());
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts_unchecked(
            n,
            n,
            (0..=n).collect(),
            (0..n).collect(),
            alloc::vec![1.0; n],
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the values only; the sparsity structure is fixed.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row_len(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[row]..self.row_offsets[row + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn row_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_row_len(&self) -> usize {
        self.row_lengths().max().unwrap_or(0)
    }

    pub fn min_row_len(&self) -> usize {
        self.row_lengths().min().unwrap_or(0)
    }

    /// Diagonal entries (0.0 where a row has no diagonal entry).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.binary_search(&i).map(|k| vals[k]).unwrap_or(0.0)
            })
            .collect()
    }

    /// Position of `(row, col)` in the value array, if stored.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let (cols, _) = self.row(row);
        cols.binary_search(&col)
            .ok()
            .map(|k| self.row_offsets[row] + k)
    }

    pub fn to_coo(&self) -> SparseCoo {
        let mut coo = SparseCoo::with_capacity(self.nrows, self.ncols, self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                coo.push(r, c, v).expect("csr indices are in range");
            }
        }
        coo
    }

    pub fn transpose(&self) -> SparseCsr {
        let mut counts = alloc::vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = alloc::vec![0usize; self.nnz()];
        let mut vals = alloc::vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                cols[next[c]] = r;
                vals[next[c]] = v;
                next[c] += 1;
            }
        }
        SparseCsr::from_parts_unchecked(self.ncols, self.nrows, counts, cols, vals)
    }

    /// Same sparsity pattern as its transpose (values ignored).
    pub fn is_pattern_symmetric(&self) -> bool {
        let t = self.transpose();
        t.row_offsets == self.row_offsets && t.col_indices == self.col_indices
    }

    /// Borrowed view usable by the layout builders.
    pub fn view(&self) -> CsrView<'_> {
        CsrView {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: &self.row_offsets,
            col_indices: &self.col_indices,
            values: &self.values,
        }
    }
}

/// Row-compressed arrays without the sorted-columns requirement.
///
/// The `r` renumbering produces rows whose columns are no longer ascending;
/// layout builders accept this view so they work for both.
#[derive(Debug, Clone, Copy)]
pub struct CsrView<'a> {
    pub nrows: usize,
    pub ncols: usize,
    pub row_offsets: &'a [usize],
    pub col_indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> CsrView<'a> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_len(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    pub fn row(&self, row: usize) -> (&'a [usize], &'a [f64]) {
        let span = self.row_offsets[row]..self.row_offsets[row + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }
}

pub(crate) fn validate(
    nrows: usize,
    ncols: usize,
    row_offsets: &[usize],
    col_indices: &[usize],
    values: &[f64],
    require_sorted: bool,
) -> Result<()> {
    if row_offsets.len() != nrows + 1 {
        return Err(Error::InvalidStructure(format!(
            "row_offsets has length {}, expected {}",
            row_offsets.len(),
            nrows + 1
        )));
    }
    if row_offsets[0] != 0 {
        return Err(Error::InvalidStructure("row_offsets[0] must be 0".into()));
    }
    if col_indices.len() != values.len() {
        return Err(Error::InvalidStructure(format!(
            "{} column indices but {} values",
            col_indices.len(),
            values.len()
        )));
    }
    if row_offsets[nrows] != values.len() {
        return Err(Error::InvalidStructure(format!(
            "row_offsets[nrows] = {} but nnz = {}",
            row_offsets[nrows],
            values.len()
        )));
    }
    for r in 0..nrows {
        let (start, end) = (row_offsets[r], row_offsets[r + 1]);
        if start > end {
            return Err(Error::InvalidStructure(format!(
                "row_offsets decrease at row {r}"
            )));
        }
        let cols = &col_indices[start..end];
        if let Some(&c) = cols.iter().find(|&&c| c >= ncols) {
            return Err(Error::IndexOutOfBounds {
                row: r,
                col: c,
                nrows,
                ncols,
            });
        }
        if require_sorted && cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStructure(format!(
                "columns of row {r} are not strictly increasing"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_columns() {
        let err = SparseCsr::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
    }

    #[test]
    fn rejects_bad_offsets() {
        assert!(SparseCsr::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseCsr::new(1, 2, vec![0, 2], vec![0], vec![1.0]).is_err());
        assert!(SparseCsr::new(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
    }

    #[test]
    fn transpose_round_trip() {
        let m = SparseCsr::new(2, 3, vec![0, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let t = m.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.row(2), (&[0usize][..], &[2.0][..]));
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn diagonal_and_find() {
        let m = SparseCsr::new(2, 2, vec![0, 2, 3], vec![0, 1, 1], vec![4.0, 1.0, 5.0]).unwrap();
        assert_eq!(m.diagonal(), vec![4.0, 5.0]);
        assert_eq!(m.find(0, 1), Some(1));
        assert_eq!(m.find(1, 0), None);
    }
}
