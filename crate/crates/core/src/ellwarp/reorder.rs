use alloc::vec::Vec;

use super::Permutation;
use crate::formats::check_len;
use crate::matrix::{CsrView, SparseCsr};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReorderVariant {
    /// Rows and columns renumbered; column order inside a row follows the source.
    R,
    /// As `R`, with every row re-sorted by its new column numbers.
    Rs,
}

/// A matrix renumbered as `A'[i][j] = A[row_perm.forward[i]][col_perm.forward[j]]`.
///
/// Multiplying `A'` by `x_perm = permute_x(x)` yields `y` in the row-permuted
/// numbering; `unpermute_y` restores the original numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct ReorderedOperand {
    pub nrows: usize,
    pub ncols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
    pub row_perm: Permutation,
    pub col_perm: Permutation,
    pub variant: ReorderVariant,
    /// Entry `k` holds the source matrix's nonzero `source_index[k]`.
    pub source_index: Vec<usize>,
}

/// Renumbers rows and columns of a square matrix with the same permutation.
pub fn make_reordered_r(m: &SparseCsr, p: Permutation) -> Result<ReorderedOperand> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            nrows: m.nrows(),
            ncols: m.ncols(),
        });
    }
    ReorderedOperand::with_permutations(m, p.clone(), p)
}

/// Sorts every row of an operand by its renumbered columns.
pub fn make_reordered_rs(op: &ReorderedOperand) -> ReorderedOperand {
    let mut out = op.clone();
    out.variant = ReorderVariant::Rs;
    let mut order: Vec<usize> = Vec::new();
    for r in 0..op.nrows {
        let span = op.row_offsets[r]..op.row_offsets[r + 1];
        order.clear();
        order.extend(span.clone());
        order.sort_by_key(|&k| op.col_indices[k]);
        for (dst, &src) in span.zip(&order) {
            out.col_indices[dst] = op.col_indices[src];
            out.values[dst] = op.values[src];
            out.source_index[dst] = op.source_index[src];
        }
    }
    out
}

impl ReorderedOperand {
    pub fn with_permutations(
        m: &SparseCsr,
        row_perm: Permutation,
        col_perm: Permutation,
    ) -> Result<Self> {
        check_len(m.nrows(), row_perm.len())?;
        check_len(m.ncols(), col_perm.len())?;
        let nnz = m.nnz();
        let mut row_offsets = Vec::with_capacity(m.nrows() + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut source_index = Vec::with_capacity(nnz);
        row_offsets.push(0);
        let new_col = col_perm.inverse();
        for &old in row_perm.forward() {
            let start = m.row_offsets()[old];
            let (cols, vals) = m.row(old);
            col_indices.extend(cols.iter().map(|&c| new_col[c]));
            values.extend_from_slice(vals);
            source_index.extend(start..start + cols.len());
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows: m.nrows(),
            ncols: m.ncols(),
            row_offsets,
            col_indices,
            values,
            row_perm,
            col_perm,
            variant: ReorderVariant::R,
            source_index,
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn view(&self) -> CsrView<'_> {
        CsrView {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: &self.row_offsets,
            col_indices: &self.col_indices,
            values: &self.values,
        }
    }

    /// `x_perm[k] = x[col_perm.forward[k]]`.
    pub fn permute_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.col_perm.permute(x)
    }

    /// `y[row_perm.forward[k]] = y_perm[k]`.
    pub fn unpermute_y(&self, y_perm: &[f64]) -> Result<Vec<f64>> {
        self.row_perm.unpermute(y_perm)
    }

    /// Rewrites the values from a source matrix sharing the original pattern.
    pub fn refill_values(&mut self, source_values: &[f64]) -> Result<()> {
        check_len(self.source_index.len(), source_values.len())?;
        for (v, &k) in self.values.iter_mut().zip(&self.source_index) {
            *v = source_values[k];
        }
        Ok(())
    }

    /// Re-expresses a per-entry map of this operand as a per-source-nonzero map.
    pub fn compose_source_map(&self, per_entry: &[usize]) -> Vec<usize> {
        let mut out = alloc::vec![0usize; per_entry.len()];
        for (k, &src) in self.source_index.iter().enumerate() {
            out[src] = per_entry[k];
        }
        out
    }

    /// Explicit CSR of the renumbered matrix (columns sorted within rows).
    pub fn to_csr(&self) -> SparseCsr {
        let sorted = match self.variant {
            ReorderVariant::Rs => self.clone(),
            ReorderVariant::R => make_reordered_rs(self),
        };
        SparseCsr::from_parts_unchecked(
            sorted.nrows,
            sorted.ncols,
            sorted.row_offsets,
            sorted.col_indices,
            sorted.values,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellwarp::sort_rows_desc;
    use crate::matrix::{
        generate_synthetic, spmv_csr_reference, spmv_magnitude, within_spmv_tolerance,
        SparseCoo, SyntheticKind,
    };
    use alloc::vec;
    use proptest::prelude::*;

    /// 7x7 whose first row is the single-row example and whose length sort
    /// yields the example permutation.
    fn example() -> SparseCsr {
        let lengths = [5usize, 7, 6, 5, 7, 5, 7];
        let mut coo = SparseCoo::new(7, 7);
        for (c, v) in [0, 1, 3, 4, 5].into_iter().zip([7.0, 8.0, 9.0, 10.0, 2.0]) {
            coo.push(0, c, v).unwrap();
        }
        for (r, &len) in lengths.iter().enumerate().skip(1) {
            for c in 0..len {
                coo.push(r, c, 1.0 + (r * 7 + c) as f64).unwrap();
            }
        }
        coo.to_csr()
    }

    #[test]
    fn example_permutation_from_sort() {
        assert_eq!(sort_rows_desc(&example()).forward(), &[1, 4, 6, 2, 0, 3, 5]);
    }

    #[test]
    fn example_columns_renumbered_then_sorted() {
        let m = example();
        let op = make_reordered_r(&m, sort_rows_desc(&m)).unwrap();
        // the example row sits at sorted position 4
        let span = op.row_offsets[4]..op.row_offsets[5];
        assert_eq!(&op.col_indices[span.clone()], &[4, 0, 5, 1, 6]);
        let x: Vec<f64> = (1..=7).map(f64::from).collect();
        assert_eq!(op.permute_x(&x).unwrap(), vec![2.0, 5.0, 7.0, 3.0, 1.0, 4.0, 6.0]);
        let rs = make_reordered_rs(&op);
        assert_eq!(&rs.col_indices[span.clone()], &[0, 1, 4, 5, 6]);
        assert_eq!(&rs.values[span], &[8.0, 10.0, 7.0, 9.0, 2.0]);
    }

    #[test]
    fn identity_permutation_is_a_copy() {
        let m = example();
        let op = make_reordered_r(&m, Permutation::identity(7)).unwrap();
        assert_eq!(op.to_csr(), m);
        assert_eq!(op.col_indices, m.col_indices());
    }

    #[test]
    fn rectangular_rejected() {
        let m = generate_synthetic(
            &SyntheticKind::Random {
                nrows: 3,
                ncols: 4,
                density: 0.5,
            },
            1,
        )
        .unwrap();
        assert!(matches!(
            make_reordered_r(&m, Permutation::identity(3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn refill_tracks_source() {
        let m = example();
        let op0 = make_reordered_r(&m, sort_rows_desc(&m)).unwrap();
        let mut op = make_reordered_rs(&op0);
        let doubled: Vec<f64> = m.values().iter().map(|v| 2.0 * v).collect();
        op.refill_values(&doubled).unwrap();
        let twice = make_reordered_rs(&op0);
        for (a, b) in op.values.iter().zip(&twice.values) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    fn random_square() -> impl Strategy<Value = SparseCsr> {
        (1usize..60, 0.02f64..0.4, any::<u64>()).prop_map(|(n, d, s)| {
            generate_synthetic(
                &SyntheticKind::Random {
                    nrows: n,
                    ncols: n,
                    density: d,
                },
                s,
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn rs_rows_strictly_increase(m in random_square()) {
            let op = make_reordered_rs(&make_reordered_r(&m, sort_rows_desc(&m)).unwrap());
            for r in 0..op.nrows {
                let c = &op.col_indices[op.row_offsets[r]..op.row_offsets[r + 1]];
                prop_assert!(c.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn renumbered_product_unpermutes(m in random_square()) {
            let op = make_reordered_r(&m, sort_rows_desc(&m)).unwrap();
            let x: Vec<f64> = (0..m.ncols()).map(|i| (i as f64).sin()).collect();
            let yp = spmv_csr_reference(&op.to_csr(), &op.permute_x(&x).unwrap()).unwrap();
            let y = op.unpermute_y(&yp).unwrap();
            let reference = spmv_csr_reference(&m, &x).unwrap();
            prop_assert!(within_spmv_tolerance(&y, &reference, &spmv_magnitude(&m, &x), 1e-12).is_ok());
        }
    }
}
