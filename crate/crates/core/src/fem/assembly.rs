use alloc::vec;
use alloc::vec::Vec;

use super::TetMesh;
use crate::ellwarp::{build_k1, rowsum_k1_traced, StoreMode, WarpLayoutK1};
use crate::formats::check_len;
use crate::matrix::SparseCsr;
use crate::simt::{NoTrace, WarpModelConfig};
use crate::Result;

/// Gather structure turning element outputs into global values.
///
/// Each global tangent nonzero `k` is a row whose entries are the
/// element-local contributions `e * 16 + i * 4 + j` landing on it; each
/// global residual row `I` collects `e * 4 + i`. Both are stored as K1
/// layouts, so assembly is a row sum with one writer per destination.
#[derive(Debug, Clone)]
pub struct AssemblyMap {
    pub n_nodes: usize,
    pub n_elements: usize,
    /// Node-adjacency pattern of the global tangent (values zero).
    pub pattern: SparseCsr,
    /// Row `k` lists the contributions to global nonzero `k`.
    pub tangent_sources: SparseCsr,
    /// Row `I` lists the contributions to residual entry `I`.
    pub residual_sources: SparseCsr,
    pub tangent_layout: WarpLayoutK1,
    pub residual_layout: WarpLayoutK1,
    /// Layout slot of every element-local tangent entry.
    pub tangent_slot: Vec<usize>,
    pub residual_slot: Vec<usize>,
}

/// CSR whose row `row_of[s]` holds column `s` for every source `s`.
fn sources_csr(nrows: usize, row_of: &[usize]) -> SparseCsr {
    let mut offsets = vec![0usize; nrows + 1];
    for &r in row_of {
        offsets[r + 1] += 1;
    }
    for r in 0..nrows {
        offsets[r + 1] += offsets[r];
    }
    let mut fill = offsets.clone();
    let mut cols = vec![0usize; row_of.len()];
    for (s, &r) in row_of.iter().enumerate() {
        cols[fill[r]] = s;
        fill[r] += 1;
    }
    let n = cols.len();
    SparseCsr::from_parts_unchecked(nrows, row_of.len(), offsets, cols, vec![0.0; n])
}

/// `slot[s]` for each source `s` (the column of source-CSR nonzero `k`).
fn slots_by_source(sources: &SparseCsr, layout: &WarpLayoutK1) -> Vec<usize> {
    let mut slot = vec![0usize; sources.ncols()];
    for (k, &s) in sources.col_indices().iter().enumerate() {
        slot[s] = layout.slot_of_nnz[k];
    }
    slot
}

pub fn build_assembly_map(mesh: &TetMesh, cfg: &WarpModelConfig) -> Result<AssemblyMap> {
    let n = mesh.n_nodes();
    let ne = mesh.n_elements();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tet in &mesh.elements {
        for &a in tet {
            adj[a].extend_from_slice(tet);
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    offsets.push(0);
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
        cols.extend_from_slice(row);
        offsets.push(cols.len());
    }
    let nnz = cols.len();
    let pattern = SparseCsr::new(n, n, offsets, cols, vec![0.0; nnz])?;

    let mut tangent_row = Vec::with_capacity(16 * ne);
    let mut residual_row = Vec::with_capacity(4 * ne);
    for tet in &mesh.elements {
        for &a in tet {
            for &b in tet {
                tangent_row.push(pattern.find(a, b).expect("pattern holds every element pair"));
            }
            residual_row.push(a);
        }
    }
    let tangent_sources = sources_csr(nnz, &tangent_row);
    let residual_sources = sources_csr(n, &residual_row);
    let tangent_layout = build_k1(&tangent_sources, cfg)?;
    let residual_layout = build_k1(&residual_sources, cfg)?;
    let tangent_slot = slots_by_source(&tangent_sources, &tangent_layout);
    let residual_slot = slots_by_source(&residual_sources, &residual_layout);
    Ok(AssemblyMap {
        n_nodes: n,
        n_elements: ne,
        pattern,
        tangent_sources,
        residual_sources,
        tangent_layout,
        residual_layout,
        tangent_slot,
        residual_slot,
    })
}

impl AssemblyMap {
    pub fn tangent_nnz(&self) -> usize {
        self.pattern.nnz()
    }

    /// Contributors `(element, i, j)` of global nonzero `k`.
    pub fn tangent_contributors(&self, k: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (src, _) = self.tangent_sources.row(k);
        src.iter().map(|&s| (s / 16, (s % 16) / 4, s % 4))
    }

    /// Contributors `(element, i)` of residual row `node`.
    pub fn residual_contributors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (src, _) = self.residual_sources.row(node);
        src.iter().map(|&s| (s / 4, s % 4))
    }
}

/// Global tangent values (in `pattern` order) and residual from flat
/// element outputs: `ke_flat[e * 16 + i * 4 + j]`, `re_flat[e * 4 + i]`.
pub fn assemble_spmv(
    map: &mut AssemblyMap,
    ke_flat: &[f64],
    re_flat: &[f64],
    k_values: &mut [f64],
    residual: &mut [f64],
) -> Result<()> {
    check_len(16 * map.n_elements, ke_flat.len())?;
    check_len(4 * map.n_elements, re_flat.len())?;
    check_len(map.tangent_nnz(), k_values.len())?;
    check_len(map.n_nodes, residual.len())?;
    let tv = &mut map.tangent_layout.values;
    for (&slot, &v) in map.tangent_slot.iter().zip(ke_flat) {
        tv[slot] = v;
    }
    let rv = &mut map.residual_layout.values;
    for (&slot, &v) in map.residual_slot.iter().zip(re_flat) {
        rv[slot] = v;
    }
    rowsum_k1_traced(&map.tangent_layout, k_values, StoreMode::Remap, &mut NoTrace)?;
    rowsum_k1_traced(&map.residual_layout, residual, StoreMode::Remap, &mut NoTrace)?;
    Ok(())
}
