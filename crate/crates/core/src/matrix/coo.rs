use alloc::vec::Vec;

use super::SparseCsr;
use crate::{Error, Result};

/// Coordinate storage: parallel arrays of row indices, column indices and values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoo {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCoo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::new(),
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::with_capacity(capacity),
            cols: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
        }
    }

    /// Builds from `(row, col, value)` triples, checking bounds.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut m = Self::new(nrows, ncols);
        for (r, c, v) in entries {
            m.push(r, c, v)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.nrows || col >= self.ncols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        self.rows.push(row);
        self.cols.push(col);
        self.values.push(value);
        Ok(())
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

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// True when entries are sorted by `(row, col)` with no duplicates.
    pub fn is_canonical(&self) -> bool {
        self.rows
            .windows(2)
            .zip(self.cols.windows(2))
            .all(|(r, c)| (r[0], c[0]) < (r[1], c[1]))
    }

    /// True when entries are sorted by row (columns may be in any order).
    pub fn is_row_sorted(&self) -> bool {
        self.rows.windows(2).all(|r| r[0] <= r[1])
    }

    /// Sorts by `(row, col)` and sums duplicate coordinates.
    pub fn canonicalize(&mut self) {
        if self.is_canonical() {
            return;
        }
        let mut order: Vec<usize> = (0..self.nnz()).collect();
        // stable: duplicates are summed in input order
        order.sort_by_key(|&k| (self.rows[k], self.cols[k]));
        let mut rows = Vec::with_capacity(order.len());
        let mut cols = Vec::with_capacity(order.len());
        let mut values: Vec<f64> = Vec::with_capacity(order.len());
        for k in order {
            let (r, c, v) = (self.rows[k], self.cols[k], self.values[k]);
            match (rows.last(), cols.last()) {
                (Some(&lr), Some(&lc)) if lr == r && lc == c => {
                    *values.last_mut().unwrap() += v;
                }
                _ => {
                    rows.push(r);
                    cols.push(c);
                    values.push(v);
                }
            }
        }
        self.rows = rows;
        self.cols = cols;
        self.values = values;
    }

    pub fn to_csr(&self) -> SparseCsr {
        coo_to_csr(self.clone())
    }
}

/// Converts to canonical CSR, canonicalizing (sorting, summing duplicates) first.
pub fn coo_to_csr(mut m: SparseCoo) -> SparseCsr {
    m.canonicalize();
    let mut row_offsets = alloc::vec![0usize; m.nrows + 1];
    for &r in &m.rows {
        row_offsets[r + 1] += 1;
    }
    for i in 0..m.nrows {
        row_offsets[i + 1] += row_offsets[i];
    }
    SparseCsr::from_parts_unchecked(m.nrows, m.ncols, row_offsets, m.cols, m.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_has_zero_offsets() {
        let csr = coo_to_csr(SparseCoo::new(3, 3));
        assert_eq!(csr.row_offsets(), &[0, 0, 0, 0]);
        assert_eq!(csr.nnz(), 0);
    }

    #[test]
    fn two_entries_hand_enumerated() {
        let coo = SparseCoo::from_triplets(2, 2, [(0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        let csr = coo.to_csr();
        assert_eq!(csr.row_offsets(), &[0, 1, 2]);
        assert_eq!(csr.col_indices(), &[1, 0]);
        assert_eq!(csr.values(), &[2.0, 3.0]);
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let coo =
            SparseCoo::from_triplets(2, 3, [(1, 2, 1.0), (0, 1, 2.0), (1, 2, 4.0), (1, 0, 5.0)])
                .unwrap();
        let csr = coo.to_csr();
        assert_eq!(csr.row_offsets(), &[0, 1, 3]);
        assert_eq!(csr.col_indices(), &[1, 0, 2]);
        assert_eq!(csr.values(), &[2.0, 5.0, 5.0]);
    }

    #[test]
    fn out_of_bounds_push_is_rejected() {
        let mut coo = SparseCoo::new(2, 2);
        assert!(matches!(
            coo.push(2, 0, 1.0),
            Err(Error::IndexOutOfBounds { row: 2, .. })
        ));
    }
}
