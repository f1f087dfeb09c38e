use alloc::vec::Vec;

use super::SparseCsr;
use crate::{Error, Result};

/// Sequential row-by-row product in ascending column order.
///
/// This is the oracle every kernel is compared against. Empty rows yield 0.0.
pub fn spmv_csr_reference(m: &SparseCsr, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            got: x.len(),
        });
    }
    Ok((0..m.nrows())
        .map(|r| {
            let (cols, vals) = m.row(r);
            let mut sum = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                sum += v * x[c];
            }
            sum
        })
        .collect())
}

/// Per-row `sum_j |a_ij * x_j|`, the scale used for relative comparisons.
pub fn spmv_magnitude(m: &SparseCsr, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| {
            let (cols, vals) = m.row(r);
            cols.iter()
                .zip(vals)
                .map(|(&c, &v)| libm::fabs(v * x[c]))
                .sum()
        })
        .collect()
}

/// Component-wise check `|y - reference| <= rel * magnitude`.
///
/// Relative error is measured against the row magnitude rather than the
/// (possibly cancelled) row sum, so reassociation alone never fails it.
/// Returns the first offending row on failure.
pub fn within_spmv_tolerance(
    y: &[f64],
    reference: &[f64],
    magnitude: &[f64],
    rel: f64,
) -> core::result::Result<(), usize> {
    if y.len() != reference.len() {
        return Err(y.len().min(reference.len()));
    }
    for (i, ((&a, &b), &s)) in y.iter().zip(reference).zip(magnitude).enumerate() {
        let err = libm::fabs(a - b);
        if !(err <= rel * s || err == 0.0) {
            return Err(i);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_times_vector() {
        let y = spmv_csr_reference(&SparseCsr::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn worked_single_row_example() {
        let m = SparseCsr::new(
            1,
            7,
            vec![0, 5],
            vec![0, 1, 3, 4, 5],
            vec![7.0, 8.0, 9.0, 10.0, 2.0],
        )
        .unwrap();
        let x: Vec<f64> = (1..=7).map(f64::from).collect();
        assert_eq!(spmv_csr_reference(&m, &x).unwrap(), vec![121.0]);
    }

    #[test]
    fn empty_rows_are_zero() {
        let m = SparseCsr::new(3, 2, vec![0, 1, 1, 2], vec![0, 1], vec![2.0, 3.0]).unwrap();
        assert_eq!(spmv_csr_reference(&m, &[1.0, 1.0]).unwrap(), vec![2.0, 0.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let err = spmv_csr_reference(&SparseCsr::identity(3), &[1.0]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, got: 1 });
    }
}
