//! Measured reorder break-even points.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use warpell_core::kernel::RefillMode;
use warpell_core::solver::AlphaAnalysis;
use warpell_core::{KernelId, KernelParams, PreparedSpmv, SparseCsr, WarpModelConfig};

use crate::bench::{bench_vector, median, time_spmv};
use crate::error::Result;

pub fn refill_mode_name(mode: RefillMode) -> &'static str {
    match mode {
        RefillMode::BulkScatter => "bulk_scatter",
        RefillMode::HostLoop => "host_loop",
    }
}

/// Median seconds of `reps` value refills of an already prepared kernel.
pub fn time_refill(p: &mut PreparedSpmv, m: &SparseCsr, mode: RefillMode, reps: usize) -> Result<f64> {
    let mut samples = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        p.refill(m, mode)?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok(median(&mut samples))
}

/// Times the value reorder of `reordered`, one product of it and one of
/// `baseline`, each as a median over `reps`, and derives α.
pub fn analyze_alpha(
    m: &SparseCsr,
    reordered: KernelId,
    baseline: KernelId,
    mode: RefillMode,
    cfg: &WarpModelConfig,
    reps: usize,
) -> Result<AlphaAnalysis> {
    let params = KernelParams::default();
    let mut kernel = PreparedSpmv::prepare(reordered, m, cfg, &params)?;
    let base = PreparedSpmv::prepare(baseline, m, cfg, &params)?;
    let t_reorder = time_refill(&mut kernel, m, mode, reps)?;
    let x = bench_vector(m.ncols(), 0);
    let x_native = match kernel.permutation() {
        Some(perm) => perm.permute(&x)?,
        None => x.clone(),
    };
    let (_, t_kernel) = time_spmv(&kernel, &x_native, reps)?;
    let x_base = match base.permutation() {
        Some(perm) => perm.permute(&x)?,
        None => x,
    };
    let (_, t_base) = time_spmv(&base, &x_base, reps)?;
    Ok(AlphaAnalysis::new(t_reorder, t_kernel, t_base)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub matrix: String,
    pub kernel: String,
    pub baseline: String,
    pub mode: String,
    pub reps: usize,
    pub nnz: usize,
    pub t_reorder: f64,
    pub t_kernel: f64,
    pub t_base: f64,
    /// Integer break-even count or `inf`.
    pub alpha: String,
}

impl AlphaRow {
    pub fn new(
        matrix: &str,
        m: &SparseCsr,
        kernel: KernelId,
        baseline: KernelId,
        mode: RefillMode,
        reps: usize,
        a: &AlphaAnalysis,
    ) -> Self {
        Self {
            matrix: matrix.to_string(),
            kernel: kernel.name().to_string(),
            baseline: baseline.name().to_string(),
            mode: refill_mode_name(mode).to_string(),
            reps,
            nnz: m.nnz(),
            t_reorder: a.t_reorder,
            t_kernel: a.t_kernel,
            t_base: a.t_base,
            alpha: a.alpha.to_string(),
        }
    }
}
