use alloc::vec;
use alloc::vec::Vec;

use super::{align_up, sort_rows_desc_view, Permutation, ReorderedOperand};
use crate::formats::check_len;
use crate::matrix::{CsrView, SparseCsr};
use crate::simt::{AccessKind, NoTrace, Space, Tracer, WarpModelConfig, INDEX_BYTES, VALUE_BYTES};
use crate::Result;

/// Placement of slots inside one warp block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataOrder {
    /// Slot `j` of lane `i` at `offset + j * warp_size + i`.
    #[default]
    ColumnMajor,
    /// Slot `j` of lane `i` at `offset + i * maxrows + j`; uncoalesced, kept for comparison.
    RowMajor,
}

/// Where a finished row sum is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    /// `y[row_perm.forward[sorted_pos]]`, back in original numbering.
    Remap,
    /// `y[sorted_pos]`, left in sorted numbering.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpLayoutK1 {
    pub warp_size: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub values: Vec<f64>,
    pub col_indices: Vec<usize>,
    pub warp_offset: Vec<usize>,
    pub maxrows: Vec<usize>,
    /// `forward[sorted_pos]` is the row of the source matrix placed at `sorted_pos`.
    pub row_perm: Permutation,
    /// Row lengths indexed by sorted position.
    pub row_lens: Vec<usize>,
    pub order: DataOrder,
    /// Flat slot of every source nonzero, in source CSR order.
    pub slot_of_nnz: Vec<usize>,
}

/// Output of the shared packer: one block per warp, `lanes[w]` lanes per row.
pub(crate) struct Packed {
    pub values: Vec<f64>,
    pub col_indices: Vec<usize>,
    pub warp_offset: Vec<usize>,
    pub maxrows: Vec<usize>,
    pub slot_of_nnz: Vec<usize>,
}

/// One warp's share of the sorted rows.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WarpGroup {
    pub first: usize,
    pub rows: usize,
    pub lanes: usize,
}

pub(crate) fn pack_warps(
    m: &CsrView<'_>,
    order: &[usize],
    groups: &[WarpGroup],
    warp_size: usize,
    alignment: usize,
    data_order: DataOrder,
) -> Packed {
    let mut warp_offset = Vec::with_capacity(groups.len());
    let mut maxrows = Vec::with_capacity(groups.len());
    let mut cursor = 0;
    for g in groups {
        let longest = order[g.first..g.first + g.rows]
            .iter()
            .map(|&r| m.row_len(r).div_ceil(g.lanes))
            .max()
            .unwrap_or(0);
        let offset = align_up(cursor, alignment);
        warp_offset.push(offset);
        maxrows.push(longest);
        cursor = offset + longest * warp_size;
    }
    let mut values = vec![0.0; cursor];
    let mut col_indices = vec![0usize; cursor];
    let mut slot_of_nnz = vec![0usize; m.nnz()];
    for (w, g) in groups.iter().enumerate() {
        let (offset, height) = (warp_offset[w], maxrows[w]);
        for local in 0..g.rows {
            let row = order[g.first + local];
            let start = m.row_offsets[row];
            let (cols, vals) = m.row(row);
            for e in 0..cols.len() {
                let lane = local * g.lanes + e % g.lanes;
                let slot = e / g.lanes;
                let flat = match data_order {
                    DataOrder::ColumnMajor => offset + slot * warp_size + lane,
                    DataOrder::RowMajor => offset + lane * height + slot,
                };
                values[flat] = vals[e];
                col_indices[flat] = cols[e];
                slot_of_nnz[start + e] = flat;
            }
        }
    }
    Packed {
        values,
        col_indices,
        warp_offset,
        maxrows,
        slot_of_nnz,
    }
}

/// Moves source values into their slots through the precomputed map.
pub(crate) fn scatter_bulk(dst: &mut [f64], map: &[usize], src: &[f64]) -> Result<()> {
    check_len(map.len(), src.len())?;
    for (&slot, &v) in map.iter().zip(src) {
        dst[slot] = v;
    }
    Ok(())
}

/// Same result as [`scatter_bulk`], staged through a freshly zeroed host
/// buffer that is then copied over the layout storage.
pub(crate) fn scatter_host_staged(dst: &mut [f64], map: &[usize], src: &[f64]) -> Result<()> {
    check_len(map.len(), src.len())?;
    let mut staging = vec![0.0; dst.len()];
    for (k, &v) in src.iter().enumerate() {
        staging[map[k]] = v;
    }
    dst.copy_from_slice(&staging);
    Ok(())
}

fn k1_groups(nrows: usize, warp_size: usize) -> Vec<WarpGroup> {
    (0..nrows)
        .step_by(warp_size)
        .map(|first| WarpGroup {
            first,
            rows: warp_size.min(nrows - first),
            lanes: 1,
        })
        .collect()
}

/// K1 layout over rows taken in the order `order` (`order[sorted_pos] = source row`).
pub fn build_k1_with_order(
    m: &CsrView<'_>,
    order: Permutation,
    cfg: &WarpModelConfig,
    data_order: DataOrder,
) -> Result<WarpLayoutK1> {
    cfg.validate()?;
    check_len(m.nrows, order.len())?;
    let ws = cfg.warp_size;
    let groups = k1_groups(m.nrows, ws);
    let packed = pack_warps(
        m,
        order.forward(),
        &groups,
        ws,
        cfg.offset_alignment(),
        data_order,
    );
    let row_lens = order.forward().iter().map(|&r| m.row_len(r)).collect();
    Ok(WarpLayoutK1 {
        warp_size: ws,
        nrows: m.nrows,
        ncols: m.ncols,
        values: packed.values,
        col_indices: packed.col_indices,
        warp_offset: packed.warp_offset,
        maxrows: packed.maxrows,
        row_perm: order,
        row_lens,
        order: data_order,
        slot_of_nnz: packed.slot_of_nnz,
    })
}

pub fn build_k1(m: &SparseCsr, cfg: &WarpModelConfig) -> Result<WarpLayoutK1> {
    let view = m.view();
    build_k1_with_order(&view, sort_rows_desc_view(&view), cfg, DataOrder::ColumnMajor)
}

/// Warp-padded layout without the length sort.
pub fn build_k1_unsorted(m: &SparseCsr, cfg: &WarpModelConfig) -> Result<WarpLayoutK1> {
    build_k1_with_order(
        &m.view(),
        Permutation::identity(m.nrows()),
        cfg,
        DataOrder::ColumnMajor,
    )
}

pub fn build_k1_row_major(m: &SparseCsr, cfg: &WarpModelConfig) -> Result<WarpLayoutK1> {
    let view = m.view();
    build_k1_with_order(&view, sort_rows_desc_view(&view), cfg, DataOrder::RowMajor)
}

/// K1 over a renumbered operand. Rows are already in sorted order, and
/// `slot_of_nnz` refers to the nonzeros of the operand's source matrix.
pub fn build_k1r(op: &ReorderedOperand, cfg: &WarpModelConfig) -> Result<WarpLayoutK1> {
    let mut l = build_k1_with_order(
        &op.view(),
        Permutation::identity(op.nrows),
        cfg,
        DataOrder::ColumnMajor,
    )?;
    l.slot_of_nnz = op.compose_source_map(&l.slot_of_nnz);
    Ok(l)
}

impl WarpLayoutK1 {
    pub fn nwarps(&self) -> usize {
        self.warp_offset.len()
    }

    pub fn nnz(&self) -> usize {
        self.slot_of_nnz.len()
    }

    /// Slots owned by real rows, padding included. Lanes of a partial last
    /// warp that have no row are not counted.
    pub fn stored_slots(&self) -> usize {
        let ws = self.warp_size;
        (0..self.nwarps())
            .map(|w| self.maxrows[w] * ws.min(self.nrows - w * ws))
            .sum()
    }

    /// Length of the flat arrays, including alignment gaps and idle lanes.
    pub fn allocated_slots(&self) -> usize {
        self.values.len()
    }

    pub fn padded_slots(&self) -> usize {
        self.stored_slots() - self.nnz()
    }

    /// Flat index of slot `slot` of lane `lane` in warp `w`.
    pub fn slot_index(&self, w: usize, lane: usize, slot: usize) -> usize {
        match self.order {
            DataOrder::ColumnMajor => self.warp_offset[w] + slot * self.warp_size + lane,
            DataOrder::RowMajor => self.warp_offset[w] + lane * self.maxrows[w] + slot,
        }
    }

    /// `(source row, column, value)` stored at `flat`, or `None` for padding.
    pub fn decode(&self, flat: usize) -> Option<(usize, usize, f64)> {
        let w = self.warp_offset.partition_point(|&o| o <= flat).checked_sub(1)?;
        let rel = flat - self.warp_offset[w];
        let height = self.maxrows[w];
        if rel >= height * self.warp_size {
            return None;
        }
        let (lane, slot) = match self.order {
            DataOrder::ColumnMajor => (rel % self.warp_size, rel / self.warp_size),
            DataOrder::RowMajor => (rel / height, rel % height),
        };
        let pos = w * self.warp_size + lane;
        if pos >= self.nrows || slot >= self.row_lens[pos] {
            return None;
        }
        Some((self.row_perm.forward()[pos], self.col_indices[flat], self.values[flat]))
    }

    /// All stored entries as `(source row, column, value)`, in storage order.
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

/// Per-slot contribution of a kernel: either `a * x[col]` or `a` alone.
pub(crate) trait Term {
    const READS_X: bool;
    fn term(&self, value: f64, col: usize) -> f64;
}

pub(crate) struct Multiply<'a>(pub &'a [f64]);

impl Term for Multiply<'_> {
    const READS_X: bool = true;
    #[inline(always)]
    fn term(&self, value: f64, col: usize) -> f64 {
        value * self.0[col]
    }
}

pub(crate) struct RowSum;

impl Term for RowSum {
    const READS_X: bool = false;
    #[inline(always)]
    fn term(&self, value: f64, _: usize) -> f64 {
        value
    }
}

pub(crate) struct StepBuffers {
    pub idx: Vec<usize>,
    pub aux: Vec<usize>,
}

impl StepBuffers {
    pub fn new(warp_size: usize) -> Self {
        Self {
            idx: Vec::with_capacity(warp_size),
            aux: Vec::with_capacity(warp_size),
        }
    }
}

/// Traces the loads of one lockstep slot iteration over `idx`.
pub(crate) fn trace_slot_step<G: Term, T: Tracer>(
    tracer: &mut T,
    buf: &mut StepBuffers,
    col_indices: &[usize],
) {
    tracer.warp_step();
    tracer.access(Space::MatrixValues, AccessKind::Load, VALUE_BYTES, &buf.idx);
    if G::READS_X {
        tracer.access(Space::ColIndices, AccessKind::Load, INDEX_BYTES, &buf.idx);
        buf.aux.clear();
        buf.aux.extend(buf.idx.iter().map(|&k| col_indices[k]));
        tracer.access(Space::XVector, AccessKind::Load, VALUE_BYTES, &buf.aux);
    }
}

/// Traces the final store of `positions` (sorted positions of the storing lanes).
pub(crate) fn trace_store<T: Tracer>(
    tracer: &mut T,
    buf: &mut StepBuffers,
    positions: &[usize],
    store: StoreMode,
    forward: &[usize],
) {
    tracer.warp_step();
    match store {
        StoreMode::Remap => {
            tracer.access(Space::Metadata, AccessKind::Load, INDEX_BYTES, positions);
            buf.aux.clear();
            buf.aux.extend(positions.iter().map(|&p| forward[p]));
            tracer.warp_step();
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, &buf.aux);
        }
        StoreMode::Direct => {
            tracer.access(Space::YVector, AccessKind::Store, VALUE_BYTES, positions);
        }
    }
}

pub(crate) fn trace_warp_metadata<T: Tracer>(tracer: &mut T, w: usize, arrays: usize) {
    tracer.warp_step();
    for _ in 0..arrays {
        tracer.access(Space::Metadata, AccessKind::Load, INDEX_BYTES, &[w]);
    }
}

fn run_k1<G: Term, T: Tracer>(
    l: &WarpLayoutK1,
    g: &G,
    y: &mut [f64],
    store: StoreMode,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.nrows, y.len())?;
    let ws = l.warp_size;
    let forward = l.row_perm.forward();
    let mut acc = vec![0.0; ws];
    let mut buf = StepBuffers::new(ws);
    let mut positions: Vec<usize> = Vec::with_capacity(ws);
    for w in 0..l.nwarps() {
        let first = w * ws;
        let active = ws.min(l.nrows - first);
        let (offset, height) = (l.warp_offset[w], l.maxrows[w]);
        if T::ENABLED {
            trace_warp_metadata(tracer, w, 2);
        }
        acc[..active].fill(0.0);
        for j in 0..height {
            match l.order {
                DataOrder::ColumnMajor => {
                    let base = offset + j * ws;
                    let vals = &l.values[base..base + active];
                    let cols = &l.col_indices[base..base + active];
                    for ((a, &v), &c) in acc[..active].iter_mut().zip(vals).zip(cols) {
                        *a += g.term(v, c);
                    }
                    if T::ENABLED {
                        buf.idx.clear();
                        buf.idx.extend(base..base + active);
                    }
                }
                DataOrder::RowMajor => {
                    for (lane, a) in acc[..active].iter_mut().enumerate() {
                        let k = offset + lane * height + j;
                        *a += g.term(l.values[k], l.col_indices[k]);
                    }
                    if T::ENABLED {
                        buf.idx.clear();
                        buf.idx.extend((0..active).map(|lane| offset + lane * height + j));
                    }
                }
            }
            if T::ENABLED {
                trace_slot_step::<G, T>(tracer, &mut buf, &l.col_indices);
            }
        }
        match store {
            StoreMode::Remap => {
                for lane in 0..active {
                    y[forward[first + lane]] = acc[lane];
                }
            }
            StoreMode::Direct => y[first..first + active].copy_from_slice(&acc[..active]),
        }
        if T::ENABLED {
            positions.clear();
            positions.extend(first..first + active);
            trace_store(tracer, &mut buf, &positions, store, forward);
        }
    }
    Ok(())
}

pub fn spmv_k1_traced<T: Tracer>(
    l: &WarpLayoutK1,
    x: &[f64],
    y: &mut [f64],
    store: StoreMode,
    tracer: &mut T,
) -> Result<()> {
    check_len(l.ncols, x.len())?;
    run_k1(l, &Multiply(x), y, store, tracer)
}

/// Row sums of the stored values; no column or `x` reads.
pub fn rowsum_k1_traced<T: Tracer>(
    l: &WarpLayoutK1,
    y: &mut [f64],
    store: StoreMode,
    tracer: &mut T,
) -> Result<()> {
    run_k1(l, &RowSum, y, store, tracer)
}

/// `y = A x` with the result scattered back to original row numbering.
pub fn spmv_k1(l: &WarpLayoutK1, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.nrows];
    spmv_k1_traced(l, x, &mut y, StoreMode::Remap, &mut NoTrace)?;
    Ok(y)
}

/// `y_perm = A' x_perm` for a layout built by [`build_k1r`]; no scatter.
pub fn spmv_k1r(l: &WarpLayoutK1, x_perm: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; l.nrows];
    spmv_k1_traced(l, x_perm, &mut y, StoreMode::Direct, &mut NoTrace)?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellwarp::make_reordered_r;
    use crate::formats::build_ell;
    use crate::matrix::{
        generate_synthetic, laplacian3d, spmv_csr_reference, spmv_magnitude,
        within_spmv_tolerance, SyntheticKind,
    };
    use crate::simt::TransactionTracer;
    use proptest::prelude::*;

    fn profile(lengths: &[usize], ncols: usize) -> SparseCsr {
        generate_synthetic(
            &SyntheticKind::RowProfile {
                lengths: lengths.to_vec(),
                ncols,
            },
            3,
        )
        .unwrap()
    }

    fn xs(n: usize) -> Vec<f64> {
        (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.25).collect()
    }

    #[test]
    fn four_rows_one_warp() {
        let m = profile(&[4, 3, 2, 1], 4);
        let l = build_k1(&m, &WarpModelConfig::with_warp_size(4)).unwrap();
        assert_eq!(l.maxrows, vec![4]);
        assert_eq!(l.stored_slots(), 16);
        assert_eq!(l.padded_slots(), 6);
    }

    #[test]
    fn uniform_rows_have_no_padding() {
        let m = generate_synthetic(&SyntheticKind::UniformBand { n: 100, half_width: 3 }, 0)
            .unwrap();
        let l = build_k1(&m, &WarpModelConfig::default()).unwrap();
        assert_eq!(l.padded_slots(), 0);
        assert_eq!(l.allocated_slots(), 7 * 128);
        assert_eq!(build_ell(&m).padded_slots(), 0);
    }

    #[test]
    fn identity_matrix() {
        let m = SparseCsr::identity(37);
        let l = build_k1(&m, &WarpModelConfig::default()).unwrap();
        let x = xs(37);
        assert_eq!(spmv_k1(&l, &x).unwrap(), x);
    }

    #[test]
    fn laplacian_matches_reference() {
        let m = laplacian3d(4, 4, 4).unwrap();
        let x = xs(m.ncols());
        let reference = spmv_csr_reference(&m, &x).unwrap();
        let l = build_k1(&m, &WarpModelConfig::default()).unwrap();
        let y = spmv_k1(&l, &x).unwrap();
        within_spmv_tolerance(&y, &reference, &spmv_magnitude(&m, &x), 1e-12).unwrap();
    }

    #[test]
    fn row_major_and_unsorted_builds_agree() {
        let m = profile(&[9, 1, 4, 4, 12, 2, 0, 7, 3], 16);
        let cfg = WarpModelConfig::with_warp_size(4);
        let x = xs(16);
        let a = spmv_k1(&build_k1(&m, &cfg).unwrap(), &x).unwrap();
        let b = spmv_k1(&build_k1_row_major(&m, &cfg).unwrap(), &x).unwrap();
        let c = spmv_k1(&build_k1_unsorted(&m, &cfg).unwrap(), &x).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn refill_modes_agree() {
        let m = profile(&[5, 3, 8, 1, 2], 8);
        let mut a = build_k1(&m, &WarpModelConfig::with_warp_size(4)).unwrap();
        let mut b = a.clone();
        let fresh: Vec<f64> = (0..m.nnz()).map(|k| k as f64 - 3.5).collect();
        a.refill_values_bulk(&fresh).unwrap();
        b.refill_values_host_loop(&fresh).unwrap();
        assert_eq!(a.values, b.values);
        for (k, &s) in a.slot_of_nnz.iter().enumerate() {
            assert_eq!(a.values[s], fresh[k]);
        }
    }

    #[test]
    fn direct_store_skips_remap_metadata() {
        let m = laplacian3d(4, 4, 2).unwrap();
        let cfg = WarpModelConfig::default();
        let p = sort_rows_desc_view(&m.view());
        let l = build_k1(&m, &cfg).unwrap();
        let op = make_reordered_r(&m, p).unwrap();
        let lr = build_k1r(&op, &cfg).unwrap();
        let x = xs(m.ncols());
        let mut y = vec![0.0; m.nrows()];
        let mut t1 = TransactionTracer::new(128, 0);
        spmv_k1_traced(&l, &x, &mut y, StoreMode::Remap, &mut t1).unwrap();
        let mut t2 = TransactionTracer::new(128, 0);
        spmv_k1_traced(&lr, &op.permute_x(&x).unwrap(), &mut y, StoreMode::Direct, &mut t2)
            .unwrap();
        let (r1, r2) = (t1.into_report(), t2.into_report());
        assert!(r2.transactions(Space::Metadata) < r1.transactions(Space::Metadata));
        assert!(r2.transactions(Space::YVector) <= r1.transactions(Space::YVector));
    }

    fn arb_matrix() -> impl Strategy<Value = SparseCsr> {
        (1usize..80, 1usize..40, 0.02f64..0.5, any::<u64>()).prop_map(|(r, c, d, s)| {
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
        fn decode_round_trips(m in arb_matrix(), ws in prop::sample::select(vec![4usize, 8, 32])) {
            let l = build_k1(&m, &WarpModelConfig::with_warp_size(ws)).unwrap();
            let mut got: Vec<(usize, usize, u64)> =
                l.entries().map(|(r, c, v)| (r, c, v.to_bits())).collect();
            got.sort_unstable();
            let mut want: Vec<(usize, usize, u64)> =
                m.to_coo().entries().map(|(r, c, v)| (r, c, v.to_bits())).collect();
            want.sort_unstable();
            prop_assert_eq!(got, want);
            for (k, &s) in l.slot_of_nnz.iter().enumerate() {
                prop_assert_eq!(l.values[s].to_bits(), m.values()[k].to_bits());
            }
        }

        #[test]
        fn layout_invariants(m in arb_matrix(), ws in prop::sample::select(vec![4usize, 8, 32])) {
            let l = build_k1(&m, &WarpModelConfig::with_warp_size(ws)).unwrap();
            for w in 0..l.nwarps() {
                let rows = &l.row_lens[w * ws..((w + 1) * ws).min(l.nrows)];
                prop_assert_eq!(l.maxrows[w], rows.iter().copied().max().unwrap_or(0));
                if w + 1 < l.nwarps() {
                    prop_assert!(l.warp_offset[w + 1] >= l.warp_offset[w] + l.maxrows[w] * ws);
                }
            }
            prop_assert!(l.row_lens.windows(2).all(|p| p[0] >= p[1]));
            prop_assert!(l.padded_slots() <= build_ell(&m).padded_slots());
        }

        #[test]
        fn matches_reference(m in arb_matrix(), ws in prop::sample::select(vec![4usize, 8, 32])) {
            let x = xs(m.ncols());
            let reference = spmv_csr_reference(&m, &x).unwrap();
            let y = spmv_k1(&build_k1(&m, &WarpModelConfig::with_warp_size(ws)).unwrap(), &x).unwrap();
            prop_assert!(within_spmv_tolerance(&y, &reference, &spmv_magnitude(&m, &x), 1e-12).is_ok());
        }
    }
}
