use alloc::vec;
use alloc::vec::Vec;

use super::check_len;
use crate::matrix::SparseCsr;
use crate::simt::{AccessKind, Space, Tracer, INDEX_BYTES, VALUE_BYTES};
use crate::Result;

/// Thread-per-row CSR: the reference product executed in lockstep warps of
/// consecutive rows. Summation order equals the reference, so the output is
/// bitwise identical to [`spmv_csr_reference`](crate::matrix::spmv_csr_reference).
pub fn spmv_csr_scalar_traced<T: Tracer>(
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
    let mut acc = vec![0.0; warp_size];
    let mut idx: Vec<usize> = Vec::with_capacity(warp_size);
    let mut xs: Vec<usize> = Vec::with_capacity(warp_size);
    for first in (0..m.nrows()).step_by(warp_size.max(1)) {
        let active = warp_size.min(m.nrows() - first);
        let rows = first..first + active;
        if T::ENABLED {
            idx.clear();
            idx.extend(first..=first + active);
            tracer.access(Space::Metadata, AccessKind::Load, INDEX_BYTES, &idx);
        }
        let steps = rows.clone().map(|r| m.row_len(r)).max().unwrap_or(0);
        acc[..active].fill(0.0);
        for j in 0..steps {
            idx.clear();
            for (lane, r) in rows.clone().enumerate() {
                let k = offsets[r] + j;
                if k < offsets[r + 1] {
                    acc[lane] += vals[k] * x[cols[k]];
                    if T::ENABLED {
                        idx.push(k);
                    }
                }
            }
            if T::ENABLED {
                xs.clear();
                xs.extend(idx.iter().map(|&k| cols[k]));
                tracer.warp_step();
                tracer.access(Space::MatrixValues, AccessKind::Load, VALUE_BYTES, &idx);
                tracer.access(Space::ColIndices, AccessKind::Load, INDEX_BYTES, &idx);
                tracer.access(Space::XVector, AccessKind::Load, VALUE_BYTES, &xs);
            }
        }
        y[rows.clone()].copy_from_slice(&acc[..active]);
        if T::ENABLED {
            idx.clear();
            idx.extend(rows);
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, &idx);
        }
    }
    Ok(())
}
