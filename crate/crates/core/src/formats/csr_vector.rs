use alloc::vec;
use alloc::vec::Vec;

use super::check_len;
use crate::matrix::SparseCsr;
use crate::simt::{AccessKind, NoTrace, Space, Tracer, WarpModelConfig, INDEX_BYTES, VALUE_BYTES};
use crate::Result;

pub fn spmv_csr_vector(m: &SparseCsr, x: &[f64], cfg: &WarpModelConfig) -> Result<Vec<f64>> {
    let mut y = vec![0.0; m.nrows()];
    spmv_csr_vector_traced(m, x, &mut y, cfg.warp_size, &mut NoTrace)?;
    Ok(y)
}

/// One warp per row: lane `l` accumulates entries `l, l + W, l + 2W, ...`,
/// then a pairwise tree over the lanes leaves the row sum in lane 0.
pub fn spmv_csr_vector_traced<T: Tracer>(
    m: &SparseCsr,
    x: &[f64],
    y: &mut [f64],
    warp_size: usize,
    tracer: &mut T,
) -> Result<()> {
    check_len(m.ncols(), x.len())?;
    check_len(m.nrows(), y.len())?;
    let offsets = m.row_offsets();
    let (cols, vals) = (m.col_indices(), m.values());
    let mut lanes = vec![0.0; warp_size];
    let mut idx: Vec<usize> = Vec::with_capacity(warp_size);
    let mut xs: Vec<usize> = Vec::with_capacity(warp_size);
    for row in 0..m.nrows() {
        let (start, end) = (offsets[row], offsets[row + 1]);
        if T::ENABLED {
            tracer.access(Space::Metadata, AccessKind::Load, INDEX_BYTES, &[row, row + 1]);
        }
        lanes.fill(0.0);
        for base in (start..end).step_by(warp_size.max(1)) {
            let active = warp_size.min(end - base);
            for (l, acc) in lanes[..active].iter_mut().enumerate() {
                let k = base + l;
                *acc += vals[k] * x[cols[k]];
            }
            if T::ENABLED {
                idx.clear();
                idx.extend(base..base + active);
                xs.clear();
                xs.extend(idx.iter().map(|&k| cols[k]));
                tracer.warp_step();
                tracer.access(Space::MatrixValues, AccessKind::Load, VALUE_BYTES, &idx);
                tracer.access(Space::ColIndices, AccessKind::Load, INDEX_BYTES, &idx);
                tracer.access(Space::XVector, AccessKind::Load, VALUE_BYTES, &xs);
            }
        }
        let mut stride = 1;
        while stride < warp_size {
            for l in (0..warp_size).step_by(2 * stride) {
                lanes[l] += lanes[l + stride];
            }
            stride <<= 1;
        }
        y[row] = lanes[0];
        if T::ENABLED {
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, &[row]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::generate::laplacian3d;
    use crate::matrix::{spmv_csr_reference, spmv_magnitude, within_spmv_tolerance};
    use crate::simt::TransactionTracer;

    #[test]
    fn short_row_leaves_idle_lanes_at_zero() {
        let m = SparseCsr::new(1, 4, vec![0, 2], vec![1, 3], vec![2.0, 3.0]).unwrap();
        let y = spmv_csr_vector(&m, &[1.0, 1.0, 1.0, 1.0], &WarpModelConfig::default()).unwrap();
        assert_eq!(y, vec![5.0]);
    }

    #[test]
    fn long_row_takes_ceil_steps() {
        let m = SparseCsr::new(1, 100, vec![0, 100], (0..100).collect(), vec![1.0; 100]).unwrap();
        let mut t = TransactionTracer::new(128, 0);
        let mut y = vec![0.0];
        spmv_csr_vector_traced(&m, &[1.0; 100], &mut y, 32, &mut t).unwrap();
        assert_eq!(t.report().total_warp_steps, 4);
        assert_eq!(y, vec![100.0]);
    }

    #[test]
    fn laplacian_matches_reference() {
        let m = laplacian3d(4, 4, 4).unwrap();
        let x: Vec<f64> = (0..m.ncols()).map(|i| (i as f64).sin()).collect();
        let y = spmv_csr_vector(&m, &x, &WarpModelConfig::default()).unwrap();
        let r = spmv_csr_reference(&m, &x).unwrap();
        within_spmv_tolerance(&y, &r, &spmv_magnitude(&m, &x), 1e-12).unwrap();
    }
}
