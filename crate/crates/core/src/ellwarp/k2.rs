use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::k1::{
    pack_warps, scatter_bulk, scatter_host_staged, trace_slot_step, trace_store,
    trace_warp_metadata, DataOrder, Multiply, StepBuffers, StoreMode, Term, WarpGroup,
};
use super::{sort_rows_desc_view, Permutation, ReorderedOperand};
use crate::formats::check_len;
use crate::matrix::{CsrView, SparseCsr};
use crate::simt::{NoTrace, Tracer, WarpModelConfig};
use crate::{Error, Result};

/// Lanes given to a row of `nnz_row` entries: the smallest power of two `p`
/// with `ceil(nnz_row / p) <= threshold`, or the whole warp if none fits.
pub fn compute_k2_lanes(nnz_row: usize, threshold: usize, warp_size: usize) -> usize {
    let mut p = 1;
    while p < warp_size && nnz_row.div_ceil(p) > threshold.max(1) {
        p *= 2;
    }
    p.min(warp_size)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpLayoutK2 {
    pub warp_size: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub threshold: usize,
    pub values: Vec<f64>,
    pub col_indices: Vec<usize>,
    pub warp_offset: Vec<usize>,
    pub maxrows: Vec<usize>,
    /// Lanes per row in each warp.
    pub reduction: Vec<usize>,
    /// First sorted position served by each warp.
    pub rows_offset_warp: Vec<usize>,
    /// Rows actually served by each warp (at most `warp_size / reduction[w]`).
    pub rows_in_warp: Vec<usize>,
    pub row_perm: Permutation,
    /// Row lengths indexed by sorted position.
    pub row_lens: Vec<usize>,
    pub slot_of_nnz: Vec<usize>,
}

pub fn build_k2_with_order(
    m: &CsrView<'_>,
    order: Permutation,
    cfg: &WarpModelConfig,
    threshold: usize,
) -> Result<WarpLayoutK2> {
    cfg.validate()?;
    check_len(m.nrows, order.len())?;
    if threshold == 0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be at least 1, got {threshold}"
        )));
    }
    let ws = cfg.warp_size;
    let forward = order.forward();
    let lanes: Vec<usize> = forward
        .iter()
        .map(|&r| compute_k2_lanes(m.row_len(r), threshold, ws))
        .collect();
    let mut groups = Vec::new();
    let mut pos = 0;
    while pos < m.nrows {
        let l = lanes[pos];
        let capacity = ws / l;
        let first = pos;
        while pos < m.nrows && pos - first < capacity && lanes[pos] == l {
            pos += 1;
        }
        groups.push(WarpGroup {
            first,
            rows: pos - first,
            lanes: l,
        });
    }
    let packed = pack_warps(
        m,
        forward,
        &groups,
        ws,
        cfg.offset_alignment(),
        DataOrder::ColumnMajor,
    );
    let row_lens = forward.iter().map(|&r| m.row_len(r)).collect();
    Ok(WarpLayoutK2 {
        warp_size: ws,
        nrows: m.nrows,
        ncols: m.ncols,
        threshold,
        values: packed.values,
        col_indices: packed.col_indices,
        warp_offset: packed.warp_offset,
        maxrows: packed.maxrows,
        reduction: groups.iter().map(|g| g.lanes).collect(),
        rows_offset_warp: groups.iter().map(|g| g.first).collect(),
        rows_in_warp: groups.iter().map(|g| g.rows).collect(),
        row_perm: order,
        row_lens,
        slot_of_nnz: packed.slot_of_nnz,
    })
}

pub fn build_k2(m: &SparseCsr, cfg: &WarpModelConfig, threshold: usize) -> Result<WarpLayoutK2> {
    let view = m.view();
    build_k2_with_order(&view, sort_rows_desc_view(&view), cfg, threshold)
}

/// K2 over a renumbered operand; see [`super::build_k1r`].
pub fn build_k2r(
    op: &ReorderedOperand,
    cfg: &WarpModelConfig,
    threshold: usize,
) -> Result<WarpLayoutK2> {
    let mut l = build_k2_with_order(
        &op.view(),
        Permutation::identity(op.nrows),
        cfg,
        threshold,
    )?;
    l.slot_of_nnz = op.compose_source_map(&l.slot_of_nnz);
    Ok(l)
}

impl WarpLayoutK2 {
    pub fn nwarps(&self) -> usize {
        self.warp_offset.len()
    }

    pub fn nnz(&self) -> usize {
        self.slot_of_nnz.len()
    }

    /// Slots owned by real rows (idle lanes of partially filled warps excluded).
    pub fn stored_slots(&self) -> usize {
        (0..self.nwarps())
            .map(|w| self.maxrows[w] * self.rows_in_warp[w] * self.reduction[w])
            .sum()
    }

    pub fn padded_slots(&self) -> usize {
        self.stored_slots() - self.nnz()
    }

    pub fn allocated_slots(&self) -> usize {
        self.values.len()
    }

    /// `(source row, column, value)` stored at `flat`, or `None` for padding.
    pub fn decode(&self, flat: usize) -> Option<(usize, usize, f64)> {
        let ws = self.warp_size;
        let w = self.warp_offset.partition_point(|&o| o <= flat).checked_sub(1)?;
        let rel = flat - self.warp_offset[w];
        if rel >= self.maxrows[w] * ws {
            return None;
        }
        let (lane, slot) = (rel % ws, rel / ws);
        let r = self.reduction[w];
        let local = lane / r;
        if local >= self.rows_in_warp[w] {
            return None;
        }
        let pos = self.rows_offset_warp[w] + local;
        let entry = slot * r + lane % r;
        if entry >= self.row_lens[pos] {
            return None;
        }
        Some((self.row_perm.forward()[pos], self.col_indices[flat], self.values[flat]))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.values.len()).filter_map(move |k| self.decode(k))
    }

    pub fn refill_values_bulk(&mut self, source_values: &[f64]) -> Result<()> {
        scatter_bulk(&mut self.values, &self.slot_of_nnz, source_values)
    }

    pub fn refill_values_host_loop(&mut self, source_values: &[f64]) -> Result<()> {
        scatter_host_staged(&mut self.values, &self.slot_of_nnz, source_values)
    }
}

fn run_k2<G: Term, T: Tracer>(
    l: &WarpLayoutK2,
    g: &G,
    y: &mut [f64],
    store: StoreMode,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.nrows, y.len())?;
    let ws = l.warp_size;
    let forward = l.row_perm.forward();
    let mut scratch = vec![0.0; ws];
    let mut buf = StepBuffers::new(ws);
    let mut positions: Vec<usize> = Vec::with_capacity(ws);
    for w in 0..l.nwarps() {
        let r = l.reduction[w];
        let active = l.rows_in_warp[w] * r;
        let offset = l.warp_offset[w];
        if T::ENABLED {
            trace_warp_metadata(tracer, w, 5);
        }
        scratch[..active].fill(0.0);
        for j in 0..l.maxrows[w] {
            let base = offset + j * ws;
            let vals = &l.values[base..base + active];
            let cols = &l.col_indices[base..base + active];
            for ((a, &v), &c) in scratch[..active].iter_mut().zip(vals).zip(cols) {
                *a += g.term(v, c);
            }
            if T::ENABLED {
                buf.idx.clear();
                buf.idx.extend(base..base + active);
                trace_slot_step::<G, T>(tracer, &mut buf, &l.col_indices);
            }
        }
        let mut stride = 1;
        while stride < r {
            for lane in (0..active).step_by(2 * stride) {
                scratch[lane] += scratch[lane + stride];
            }
            if T::ENABLED {
                tracer.warp_step();
            }
            stride *= 2;
        }
        let first = l.rows_offset_warp[w];
        for local in 0..l.rows_in_warp[w] {
            let pos = first + local;
            let dest = match store {
                StoreMode::Remap => forward[pos],
                StoreMode::Direct => pos,
            };
            y[dest] = scratch[local * r];
        }
        if T::ENABLED {
            positions.clear();
            positions.extend(first..first + l.rows_in_warp[w]);
            trace_store(tracer, &mut buf, &positions, store, forward);
        }
    }
    Ok(())
}

pub fn spmv_k2_traced<T: Tracer>(
    l: &WarpLayoutK2,
    x: &[f64],
    y: &mut [f64],
    store: StoreMode,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.ncols, x.len())?;
    run_k2(l, &Multiply(x), y, store, tracer)
}

pub fn spmv_k2(l: &WarpLayoutK2, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.nrows];
    spmv_k2_traced(l, x, &mut y, StoreMode::Remap, &mut NoTrace)?;
    Ok(y)
}

pub fn spmv_k2r(l: &WarpLayoutK2, x_perm: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.nrows];
    spmv_k2_traced(l, x_perm, &mut y, StoreMode::Direct, &mut NoTrace)?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellwarp::{build_k1, spmv_k1};
    use crate::matrix::{
        generate_synthetic, spmv_csr_reference, spmv_magnitude, within_spmv_tolerance,
        SyntheticKind,
    };
    use proptest::prelude::*;

    /// Brute-force lane count: halve the per-lane work until it fits.
    fn lanes_by_halving(nnz: usize, t: usize, ws: usize) -> usize {
        let mut lanes = 1;
        let mut per_lane = nnz;
        while per_lane > t && lanes < ws {
            lanes *= 2;
            per_lane = nnz.div_ceil(lanes);
        }
        lanes
    }

    #[test]
    fn lane_counts() {
        assert_eq!(compute_k2_lanes(10, 10, 32), 1);
        assert_eq!(compute_k2_lanes(11, 10, 32), 2);
        assert_eq!(compute_k2_lanes(41, 10, 32), 8);
        assert_eq!(compute_k2_lanes(400, 10, 32), 32);
        assert_eq!(compute_k2_lanes(0, 1, 32), 1);
    }

    #[test]
    fn lane_counts_match_halving() {
        for ws in [4, 8, 32] {
            for t in 1..30 {
                for nnz in 0..500 {
                    assert_eq!(compute_k2_lanes(nnz, t, ws), lanes_by_halving(nnz, t, ws));
                }
            }
        }
    }

    fn profile(lengths: &[usize], ncols: usize) -> SparseCsr {
        generate_synthetic(
            &SyntheticKind::RowProfile {
                lengths: lengths.to_vec(),
                ncols,
            },
            5,
        )
        .unwrap()
    }

    #[test]
    fn long_row_gets_sixteen_lanes() {
        let mut lengths = vec![8; 40];
        lengths.insert(0, 100);
        let m = profile(&lengths, 128);
        let l = build_k2(&m, &WarpModelConfig::default(), 10).unwrap();
        assert_eq!(l.reduction, vec![16, 1, 1]);
        assert_eq!(l.rows_in_warp, vec![1, 32, 8]);
        assert_eq!(l.maxrows, vec![7, 8, 8]);
        let x: Vec<f64> = (0..128).map(|i| i as f64 * 0.5).collect();
        let reference = spmv_csr_reference(&m, &x).unwrap();
        let y = spmv_k2(&l, &x).unwrap();
        within_spmv_tolerance(&y, &reference, &spmv_magnitude(&m, &x), 1e-12).unwrap();
    }

    #[test]
    fn four_lane_row_sums_exactly() {
        // integer-valued row: every summation order is exact
        let m = SparseCsr::new(
            1,
            10,
            vec![0, 10],
            (0..10).collect(),
            (1..=10).map(f64::from).collect(),
        )
        .unwrap();
        let l = build_k2(&m, &WarpModelConfig::default(), 3).unwrap();
        assert_eq!(l.reduction, vec![4]);
        let y = spmv_k2(&l, &[1.0; 10]).unwrap();
        assert_eq!(y, vec![55.0]);
    }

    #[test]
    fn zero_threshold_rejected() {
        let m = SparseCsr::identity(3);
        assert!(build_k2(&m, &WarpModelConfig::default(), 0).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = SparseCsr> {
        (1usize..90, 1usize..70, 0.02f64..0.6, any::<u64>()).prop_map(|(r, c, d, s)| {
            generate_synthetic(
                &SyntheticKind::Random {
                    nrows: r,
                    ncols: c,
                    density: d,
                },
                s,
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn large_threshold_degenerates_to_k1(m in arb_matrix(), ws in prop::sample::select(vec![4usize, 8, 32])) {
            let cfg = WarpModelConfig::with_warp_size(ws);
            let t = m.max_row_len().max(1);
            let k2 = build_k2(&m, &cfg, t).unwrap();
            let k1 = build_k1(&m, &cfg).unwrap();
            prop_assert!(k2.reduction.iter().all(|&r| r == 1));
            prop_assert_eq!(k2.padded_slots(), k1.padded_slots());
            prop_assert_eq!(&k2.values, &k1.values);
            let x: Vec<f64> = (0..m.ncols()).map(|i| (i as f64 * 0.37).cos()).collect();
            let a = spmv_k2(&k2, &x).unwrap();
            let b = spmv_k1(&k1, &x).unwrap();
            prop_assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn invariants_and_reference(m in arb_matrix(), ws in prop::sample::select(vec![4usize, 8, 32]), tfrac in 0.0f64..1.0) {
            let cfg = WarpModelConfig::with_warp_size(ws);
            let (lo, hi) = (m.min_row_len().max(1), m.max_row_len().max(1));
            let t = lo + ((hi - lo) as f64 * tfrac) as usize;
            let l = build_k2(&m, &cfg, t).unwrap();
            for w in 0..l.nwarps() {
                let r = l.reduction[w];
                prop_assert!(r.is_power_of_two() && ws % r == 0);
                prop_assert!(l.rows_in_warp[w] >= 1 && l.rows_in_warp[w] <= ws / r);
                let first = l.rows_offset_warp[w];
                let rows = &l.row_lens[first..first + l.rows_in_warp[w]];
                prop_assert_eq!(l.maxrows[w], rows.iter().map(|n| n.div_ceil(r)).max().unwrap());
                if r < ws {
                    prop_assert!(l.maxrows[w] <= t);
                }
            }
            let mut got: Vec<(usize, usize, u64)> = l.entries().map(|(r, c, v)| (r, c, v.to_bits())).collect();
            got.sort_unstable();
            let mut want: Vec<(usize, usize, u64)> = m.to_coo().entries().map(|(r, c, v)| (r, c, v.to_bits())).collect();
            want.sort_unstable();
            prop_assert_eq!(got, want);
            let x: Vec<f64> = (0..m.ncols()).map(|i| 1.0 - (i as f64 * 0.11).sin()).collect();
            let reference = spmv_csr_reference(&m, &x).unwrap();
            let y = spmv_k2(&l, &x).unwrap();
            prop_assert!(within_spmv_tolerance(&y, &reference, &spmv_magnitude(&m, &x), 1e-12).is_ok());
        }
    }
}
