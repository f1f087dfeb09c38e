//! Uniform access to every SPMV kernel.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ellwarp::{
    build_k1, build_k1r, build_k2, build_k2r, make_reordered_r, make_reordered_rs,
    sort_rows_desc, spmv_k1_traced, spmv_k2_traced, Permutation, StoreMode, WarpLayoutK1,
    WarpLayoutK2,
};
use crate::formats::{
    build_ell, build_hyb, check_len, default_hyb_width, spmv_coo_segmented_traced,
    spmv_csr_scalar_traced, spmv_csr_vector_traced, spmv_ell_traced, spmv_hyb_traced, EllLayout,
    HybLayout,
};
use crate::matrix::{SparseCoo, SparseCsr, BYTES_PER_NONZERO};
use crate::simt::{NoTrace, TransactionReport, TransactionTracer, Tracer, WarpModelConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelId {
    CsrRef,
    CsrVector,
    Coo,
    Ell,
    Hyb,
    K1,
    K1r,
    K1rs,
    K2,
    K2r,
    K2rs,
}

impl KernelId {
    pub const ALL: [KernelId; 11] = [
        KernelId::CsrRef,
        KernelId::CsrVector,
        KernelId::Coo,
        KernelId::Ell,
        KernelId::Hyb,
        KernelId::K1,
        KernelId::K1r,
        KernelId::K1rs,
        KernelId::K2,
        KernelId::K2r,
        KernelId::K2rs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelId::CsrRef => "csr_ref",
            KernelId::CsrVector => "csr_vector",
            KernelId::Coo => "coo",
            KernelId::Ell => "ell",
            KernelId::Hyb => "hyb",
            KernelId::K1 => "k1",
            KernelId::K1r => "k1r",
            KernelId::K1rs => "k1rs",
            KernelId::K2 => "k2",
            KernelId::K2r => "k2r",
            KernelId::K2rs => "k2rs",
        }
    }

    /// Kernels that work on a renumbered operand and need a square matrix.
    pub fn is_renumbered(self) -> bool {
        matches!(
            self,
            KernelId::K1r | KernelId::K1rs | KernelId::K2r | KernelId::K2rs
        )
    }

    pub fn uses_threshold(self) -> bool {
        matches!(self, KernelId::K2 | KernelId::K2r | KernelId::K2rs)
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelId::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<&str> = KernelId::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown kernel '{s}', expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Format parameters; `None` picks a matrix-dependent default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KernelParams {
    /// ELL width of the HYB split.
    pub k_ell: Option<usize>,
    /// K2 per-lane slot threshold.
    pub threshold: Option<usize>,
}

impl KernelParams {
    pub fn with_threshold(threshold: usize) -> Self {
        Self {
            threshold: Some(threshold),
            ..Self::default()
        }
    }
}

/// Default K2 threshold: the mean row length, rounded up.
pub fn default_threshold(m: &SparseCsr) -> usize {
    if m.nrows() == 0 {
        return 1;
    }
    m.nnz().div_ceil(m.nrows()).max(1)
}

/// How new values are moved into an existing layout that shares the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefillMode {
    /// One scatter pass through the precomputed nonzero map.
    BulkScatter,
    /// The same scatter staged through a fresh zeroed buffer and copied in.
    HostLoop,
}

#[derive(Debug, Clone)]
enum Storage {
    CsrRef(SparseCsr),
    CsrVector(SparseCsr),
    Coo(SparseCoo),
    Ell(EllLayout),
    Hyb(HybLayout),
    K1(WarpLayoutK1),
    K2(WarpLayoutK2),
}

/// A kernel with its storage built from one CSR matrix.
///
/// Renumbered kernels keep the permutation and work in sorted numbering; the
/// `_native` methods expose that numbering, [`PreparedSpmv::apply`] hides it.
#[derive(Debug, Clone)]
pub struct PreparedSpmv {
    id: KernelId,
    nrows: usize,
    ncols: usize,
    nnz: usize,
    cfg: WarpModelConfig,
    perm: Option<Permutation>,
    storage: Storage,
}

impl PreparedSpmv {
    pub fn prepare(
        id: KernelId,
        m: &SparseCsr,
        cfg: &WarpModelConfig,
        params: &KernelParams,
    ) -> Result<Self> {
        cfg.validate()?;
        let threshold = params.threshold.unwrap_or_else(|| default_threshold(m));
        let mut perm = None;
        let storage = match id {
            KernelId::CsrRef => Storage::CsrRef(m.clone()),
            KernelId::CsrVector => Storage::CsrVector(m.clone()),
            KernelId::Coo => Storage::Coo(m.to_coo()),
            KernelId::Ell => Storage::Ell(build_ell(m)),
            KernelId::Hyb => {
                Storage::Hyb(build_hyb(m, params.k_ell.unwrap_or_else(|| default_hyb_width(m))))
            }
            KernelId::K1 => Storage::K1(build_k1(m, cfg)?),
            KernelId::K2 => Storage::K2(build_k2(m, cfg, threshold)?),
            KernelId::K1r | KernelId::K1rs | KernelId::K2r | KernelId::K2rs => {
                if !m.is_square() {
                    return Err(Error::Incompatible {
                        kernel: id.name().to_string(),
                        reason: format!(
                            "renumbering needs a square matrix, got {}x{}",
                            m.nrows(),
                            m.ncols()
                        ),
                    });
                }
                let p = sort_rows_desc(m);
                let mut op = make_reordered_r(m, p.clone())?;
                if matches!(id, KernelId::K1rs | KernelId::K2rs) {
                    op = make_reordered_rs(&op);
                }
                perm = Some(p);
                if matches!(id, KernelId::K1r | KernelId::K1rs) {
                    Storage::K1(build_k1r(&op, cfg)?)
                } else {
                    Storage::K2(build_k2r(&op, cfg, threshold)?)
                }
            }
        };
        Ok(Self {
            id,
            nrows: m.nrows(),
            ncols: m.ncols(),
            nnz: m.nnz(),
            cfg: *cfg,
            perm,
            storage,
        })
    }

    pub fn id(&self) -> KernelId {
        self.id
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn config(&self) -> &WarpModelConfig {
        &self.cfg
    }

    /// Renumbering used by the kernel's native numbering, if any.
    pub fn permutation(&self) -> Option<&Permutation> {
        self.perm.as_ref()
    }

    pub fn k1_layout(&self) -> Option<&WarpLayoutK1> {
        match &self.storage {
            Storage::K1(l) => Some(l),
            _ => None,
        }
    }

    pub fn k2_layout(&self) -> Option<&WarpLayoutK2> {
        match &self.storage {
            Storage::K2(l) => Some(l),
            _ => None,
        }
    }

    /// `(stored, padded)` slots for the padded formats.
    pub fn padding(&self) -> Option<(usize, usize)> {
        match &self.storage {
            Storage::Ell(l) => Some((l.stored_slots(), l.padded_slots())),
            Storage::Hyb(l) => Some((l.stored_slots(), l.padded_slots())),
            Storage::K1(l) => Some((l.stored_slots(), l.padded_slots())),
            Storage::K2(l) => Some((l.stored_slots(), l.padded_slots())),
            _ => None,
        }
    }

    /// Runs the kernel in its native numbering: for renumbered kernels `x`
    /// must already be permuted and `y` comes back permuted.
    pub fn apply_native<T: Tracer>(&self, x: &[f64], y: &mut [f64], tracer: &mut T) -> Result<()> {
        check_len(self.ncols, x.len())?;
        check_len(self.nrows, y.len())?;
        let ws = self.cfg.warp_size;
        let store = if self.perm.is_some() {
            StoreMode::Direct
        } else {
            StoreMode::Remap
        };
        match &self.storage {
            Storage::CsrRef(m) => spmv_csr_scalar_traced(m, x, y, ws, tracer),
            Storage::CsrVector(m) => spmv_csr_vector_traced(m, x, y, ws, tracer),
            Storage::Coo(m) => spmv_coo_segmented_traced(m, x, y, ws, false, tracer),
            Storage::Ell(l) => spmv_ell_traced(l, x, y, ws, tracer),
            Storage::Hyb(l) => spmv_hyb_traced(l, x, y, ws, tracer),
            Storage::K1(l) => spmv_k1_traced(l, x, y, store, tracer),
            Storage::K2(l) => spmv_k2_traced(l, x, y, store, tracer),
        }
    }

    /// `y = A x` in the original numbering.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match &self.perm {
            None => self.apply_native(x, y, &mut NoTrace),
            Some(p) => {
                let xp = p.permute(x)?;
                check_len(self.nrows, y.len())?;
                let mut yp = vec![0.0; self.nrows];
                self.apply_native(&xp, &mut yp, &mut NoTrace)?;
                for (k, &row) in p.forward().iter().enumerate() {
                    y[row] = yp[k];
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// Replaces the values with those of `m`, which must share the pattern
    /// the kernel was prepared from. Only warp layouts distinguish the modes.
    pub fn refill(&mut self, m: &SparseCsr, mode: RefillMode) -> Result<()> {
        check_len(self.nnz, m.nnz())?;
        match &mut self.storage {
            Storage::CsrRef(own) | Storage::CsrVector(own) => {
                own.values_mut().copy_from_slice(m.values())
            }
            Storage::Coo(own) => *own = m.to_coo(),
            Storage::Ell(l) => *l = build_ell(m),
            Storage::Hyb(l) => *l = build_hyb(m, l.ell.width),
            Storage::K1(l) => match mode {
                RefillMode::BulkScatter => l.refill_values_bulk(m.values())?,
                RefillMode::HostLoop => l.refill_values_host_loop(m.values())?,
            },
            Storage::K2(l) => match mode {
                RefillMode::BulkScatter => l.refill_values_bulk(m.values())?,
                RefillMode::HostLoop => l.refill_values_host_loop(m.values())?,
            },
        }
        Ok(())
    }
}

/// Runs a prepared kernel in its native numbering under the transaction
/// tracer. `y` is identical to the untraced result.
pub fn run_traced_spmv(p: &PreparedSpmv, x_native: &[f64]) -> Result<(Vec<f64>, TransactionReport)> {
    let cfg = p.config();
    let mut tracer = TransactionTracer::new(cfg.segment_bytes, cfg.x_cache_lines);
    let mut y = vec![0.0; p.nrows()];
    p.apply_native(x_native, &mut y, &mut tracer)?;
    let mut report = tracer.into_report();
    report.useful_bytes = BYTES_PER_NONZERO * p.nnz() as u64;
    Ok((y, report))
}

/// Kernel name list for messages.
pub fn kernel_names() -> String {
    let names: Vec<&str> = KernelId::ALL.iter().map(|k| k.name()).collect();
    names.join(", ")
}
