use alloc::vec;
use alloc::vec::Vec;

use super::check_len;
use crate::matrix::SparseCoo;
use crate::simt::{AccessKind, NoTrace, Space, Tracer, INDEX_BYTES, VALUE_BYTES};
use crate::{Error, Result};

pub fn spmv_coo_segmented(m: &SparseCoo, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; m.nrows()];
    spmv_coo_segmented_traced(m, x, &mut y, 32, false, &mut NoTrace)?;
    Ok(y)
}

/// Warp-wide segmented reduction over row-sorted COO entries.
///
/// A single warp sweeps the entries `warp_size` at a time. Each step forms
/// the lane products, runs an inclusive segmented scan keyed on the row index
/// (log2(warp_size) doubling stages), and the last lane of every row segment
/// writes its sum. A segment that runs off the end of the step is carried
/// into the first segment of the next step instead of being written.
///
/// With `accumulate` the sums are added to `y`; otherwise `y` is zeroed first.
pub fn spmv_coo_segmented_traced<T: Tracer>(
    m: &SparseCoo,
    x: &[f64],
    y: &mut [f64],
    warp_size: usize,
    accumulate: bool,
    tracer: &mut T,
) -> Result<()> {
    check_len(m.ncols(), x.len())?;
    check_len(m.nrows(), y.len())?;
    if let Some(k) = m.rows().windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::UnsortedEntries(k + 1));
    }
    if !accumulate {
        y.fill(0.0);
    }
    let (rows, cols, vals) = (m.rows(), m.cols(), m.values());
    let nnz = m.nnz();
    let mut sums = vec![0.0; warp_size];
    let mut prev = vec![0.0; warp_size];
    let mut idx: Vec<usize> = Vec::with_capacity(warp_size);
    let mut xs: Vec<usize> = Vec::with_capacity(warp_size);
    let mut carry: Option<(usize, f64)> = None;
    for start in (0..nnz).step_by(warp_size.max(1)) {
        let len = warp_size.min(nnz - start);
        let lane_row = &rows[start..start + len];
        for (l, s) in sums[..len].iter_mut().enumerate() {
            let k = start + l;
            *s = vals[k] * x[cols[k]];
        }
        let mut d = 1;
        while d < len {
            prev[..len].copy_from_slice(&sums[..len]);
            for l in d..len {
                if lane_row[l - d] == lane_row[l] {
                    sums[l] += prev[l - d];
                }
            }
            d <<= 1;
        }
        if let Some((row, partial)) = carry.take() {
            if row == lane_row[0] {
                for l in 0..len {
                    if lane_row[l] != row {
                        break;
                    }
                    sums[l] += partial;
                }
            } else {
                y[row] += partial;
            }
        }
        if T::ENABLED {
            idx.clear();
            idx.extend(start..start + len);
            xs.clear();
            xs.extend(idx.iter().map(|&k| cols[k]));
            tracer.warp_step();
            tracer.access(Space::MatrixValues, AccessKind::Load, VALUE_BYTES, &idx);
            tracer.access(Space::ColIndices, AccessKind::Load, INDEX_BYTES, &idx);
            tracer.access(Space::Metadata, AccessKind::Load, INDEX_BYTES, &idx);
            tracer.access(Space::XVector, AccessKind::Load, VALUE_BYTES, &xs);
            xs.clear();
        }
        for l in 0..len {
            let segment_end = l + 1 == len || lane_row[l + 1] != lane_row[l];
            if !segment_end {
                continue;
            }
            let continues = l + 1 == len && start + len < nnz && rows[start + len] == lane_row[l];
            if continues {
                carry = Some((lane_row[l], sums[l]));
            } else {
                y[lane_row[l]] += sums[l];
                if T::ENABLED {
                    xs.push(lane_row[l]);
                }
            }
        }
        if T::ENABLED {
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, &xs);
        }
    }
    if let Some((row, partial)) = carry {
        y[row] += partial;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{spmv_csr_reference, SparseCsr};

    #[test]
    fn worked_single_row() {
        let m = SparseCoo::from_triplets(
            1,
            7,
            [0, 1, 3, 4, 5]
                .into_iter()
                .zip([7.0, 8.0, 9.0, 10.0, 2.0])
                .map(|(c, v)| (0, c, v)),
        )
        .unwrap();
        let x: Vec<f64> = (1..=7).map(f64::from).collect();
        assert_eq!(spmv_coo_segmented(&m, &x).unwrap(), vec![121.0]);
    }

    #[test]
    fn one_entry_per_row() {
        let m = SparseCoo::from_triplets(3, 3, [(0, 2, 2.0), (1, 0, 3.0), (2, 1, 4.0)]).unwrap();
        let x = [5.0, 6.0, 7.0];
        assert_eq!(spmv_coo_segmented(&m, &x).unwrap(), vec![14.0, 15.0, 24.0]);
    }

    #[test]
    fn row_spanning_two_warp_steps() {
        let mut entries: Vec<(usize, usize, f64)> = vec![(0, 3, 1.5)];
        entries.extend((0..40).map(|c| (1, c, 0.25 * c as f64 - 3.0)));
        entries.push((2, 7, -1.0));
        let m = SparseCoo::from_triplets(3, 40, entries).unwrap();
        let x: Vec<f64> = (0..40).map(|i| 1.0 + (i % 7) as f64).collect();
        let csr: SparseCsr = m.to_csr();
        let reference = spmv_csr_reference(&csr, &x).unwrap();
        let y = spmv_coo_segmented(&m, &x).unwrap();
        for (a, b) in y.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn unsorted_rows_are_rejected() {
        let m = SparseCoo::from_triplets(2, 2, [(1, 0, 1.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(
            spmv_coo_segmented(&m, &[1.0, 1.0]),
            Err(Error::UnsortedEntries(1))
        );
    }
}
