//! Parameter sweeps over the kernel registry.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use warpell_core::kernel::run_traced_spmv;
use warpell_core::matrix::{spmv_csr_reference, spmv_magnitude, within_spmv_tolerance};
use warpell_core::simt::{effective_bandwidth_proxy, Space};
use warpell_core::{Error as CoreError, KernelId, KernelParams, PreparedSpmv, SparseCsr, WarpModelConfig};

use crate::error::{LabError, Result};

/// Iteration counts of the short, medium and long benchmark protocols.
pub const ITERATION_PRESETS: [usize; 3] = [1, 50, 1200];

/// Threshold values tried for K2-family kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThresholdSweep {
    /// The registry default (mean row length).
    Default,
    /// Every value from the shortest to the longest row.
    Full,
    List(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub matrices: Vec<String>,
    pub kernels: Vec<KernelId>,
    pub warp_sizes: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub thresholds: ThresholdSweep,
    /// ELL width of the HYB split; `None` uses the registry default.
    pub k_ell: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            matrices: Vec::new(),
            kernels: KernelId::ALL.to_vec(),
            warp_sizes: vec![32],
            block_sizes: vec![128],
            thresholds: ThresholdSweep::Default,
            k_ell: None,
            iterations: ITERATION_PRESETS[1],
            seed: 0,
        }
    }
}

/// All block sizes of the full sweep: 32 to 256 in steps of 32.
pub fn full_block_sweep() -> Vec<usize> {
    (1..=8).map(|k| 32 * k).collect()
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| LabError::Core(CoreError::InvalidParameter(msg));
        if self.matrices.is_empty() {
            return Err(invalid("bench needs at least one matrix".into()));
        }
        if self.kernels.is_empty() {
            return Err(invalid("bench needs at least one kernel".into()));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1".into()));
        }
        if self.warp_sizes.is_empty() || self.block_sizes.is_empty() {
            return Err(invalid("warp and block size sweeps must be nonempty".into()));
        }
        for &b in &self.block_sizes {
            if !(32..=256).contains(&b) || b % 32 != 0 {
                return Err(invalid(format!("block size {b} outside 32..=256 step 32")));
            }
        }
        for &ws in &self.warp_sizes {
            if ws == 0 || !ws.is_power_of_two() || ws > 32 {
                return Err(invalid(format!("warp size {ws} must be a power of two up to 32")));
            }
        }
        if let ThresholdSweep::List(ts) = &self.thresholds {
            if ts.is_empty() || ts.contains(&0) {
                return Err(invalid("threshold list must be nonempty and positive".into()));
            }
        }
        Ok(())
    }

    fn thresholds_for(&self, m: &SparseCsr) -> Vec<Option<usize>> {
        match &self.thresholds {
            ThresholdSweep::Default => vec![None],
            ThresholdSweep::Full => {
                let lo = m.min_row_len().max(1);
                let hi = m.max_row_len().max(lo);
                (lo..=hi).map(Some).collect()
            }
            ThresholdSweep::List(ts) => ts.iter().copied().map(Some).collect(),
        }
    }
}

/// Row role in a bench report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Sweep,
    /// Copy of the sweep row with the lowest median wall time.
    BestTime,
    /// Copy of the sweep row with the fewest modeled transactions.
    BestTransactions,
    Skipped,
}

/// One measured (matrix, kernel, parameter) point.
///
/// Wall-clock columns are `first_seconds`, `median_seconds` and
/// `effective_bandwidth_gbs`; everything else is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub matrix: String,
    pub kernel: String,
    pub kind: RowKind,
    pub warp_size: usize,
    pub block_size: usize,
    /// K2 threshold actually used; empty for other kernels.
    pub threshold: Option<usize>,
    pub nrows: usize,
    pub nnz: usize,
    pub iterations: usize,
    pub first_seconds: f64,
    pub median_seconds: f64,
    pub tx_values: u64,
    pub tx_col_indices: u64,
    pub tx_x: u64,
    pub tx_y: u64,
    pub tx_metadata: u64,
    pub tx_total: u64,
    /// Requested over moved bytes for the value and index arrays.
    pub matrix_utilization: f64,
    /// Matrix bytes (20 per nonzero) over all modeled traffic.
    pub total_utilization: f64,
    /// Matrix bytes per median SPMV time, in GB/s.
    pub effective_bandwidth_gbs: f64,
    pub padded_slots: usize,
    pub skip_reason: String,
}

impl BenchRow {
    /// The row with wall-clock columns zeroed.
    pub fn without_timing(&self) -> Self {
        Self {
            first_seconds: 0.0,
            median_seconds: 0.0,
            effective_bandwidth_gbs: 0.0,
            ..self.clone()
        }
    }

    fn skipped(matrix: &str, m: &SparseCsr, kernel: KernelId, cfg: &WarpModelConfig, reason: String) -> Self {
        Self {
            matrix: matrix.to_string(),
            kernel: kernel.name().to_string(),
            kind: RowKind::Skipped,
            warp_size: cfg.warp_size,
            block_size: cfg.block_size,
            threshold: None,
            nrows: m.nrows(),
            nnz: m.nnz(),
            iterations: 0,
            first_seconds: 0.0,
            median_seconds: 0.0,
            tx_values: 0,
            tx_col_indices: 0,
            tx_x: 0,
            tx_y: 0,
            tx_metadata: 0,
            tx_total: 0,
            matrix_utilization: 0.0,
            total_utilization: 0.0,
            effective_bandwidth_gbs: 0.0,
            padded_slots: 0,
            skip_reason: reason,
        }
    }
}

/// Deterministic dense input for a matrix.
pub fn bench_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub(crate) fn median(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Times `iterations` untraced products; returns (first, median) seconds.
pub fn time_spmv(p: &PreparedSpmv, x_native: &[f64], iterations: usize) -> Result<(f64, f64)> {
    let mut y = vec![0.0; p.nrows()];
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations.max(1) {
        let start = Instant::now();
        p.apply_native(x_native, &mut y, &mut warpell_core::simt::NoTrace)?;
        samples.push(start.elapsed().as_secs_f64());
        std::hint::black_box(&y);
    }
    let first = samples[0];
    Ok((first, median(&mut samples)))
}

#[allow(clippy::too_many_arguments)]
fn measure(
    name: &str,
    m: &SparseCsr,
    x: &[f64],
    reference: &[f64],
    kernel: KernelId,
    cfg: &WarpModelConfig,
    params: KernelParams,
    iterations: usize,
) -> Result<BenchRow> {
    let threshold = params.threshold;
    let p = match PreparedSpmv::prepare(kernel, m, cfg, &params) {
        Ok(p) => p,
        Err(CoreError::Incompatible { reason, .. }) => {
            return Ok(BenchRow::skipped(name, m, kernel, cfg, reason));
        }
        Err(e) => return Err(e.into()),
    };
    let x_native = match p.permutation() {
        Some(perm) => perm.permute(x)?,
        None => x.to_vec(),
    };
    let (y_native, report) = run_traced_spmv(&p, &x_native)?;
    let y = match p.permutation() {
        Some(perm) => perm.unpermute(&y_native)?,
        None => y_native,
    };
    if within_spmv_tolerance(&y, reference, &spmv_magnitude(m, x), 1e-12).is_err() {
        return Err(LabError::Mismatch {
            name: format!("{name}/{}", kernel.name()),
            expected: "product within 1e-12 of the reference".into(),
            found: "a deviating product".into(),
        });
    }
    let (first, med) = time_spmv(&p, &x_native, iterations)?;
    let tx = |s: Space| report.transactions(s);
    let used_threshold = if kernel.uses_threshold() {
        Some(threshold.unwrap_or_else(|| warpell_core::kernel::default_threshold(m)))
    } else {
        None
    };
    let matrix_bytes = report.useful_bytes as f64;
    Ok(BenchRow {
        matrix: name.to_string(),
        kernel: kernel.name().to_string(),
        kind: RowKind::Sweep,
        warp_size: cfg.warp_size,
        block_size: cfg.block_size,
        threshold: used_threshold,
        nrows: m.nrows(),
        nnz: m.nnz(),
        iterations,
        first_seconds: first,
        median_seconds: med,
        tx_values: tx(Space::MatrixValues),
        tx_col_indices: tx(Space::ColIndices),
        tx_x: tx(Space::XVector),
        tx_y: tx(Space::YVector),
        tx_metadata: tx(Space::Metadata),
        tx_total: report.total_transactions(),
        matrix_utilization: report.matrix_utilization(),
        total_utilization: effective_bandwidth_proxy(&report).unwrap_or(0.0),
        effective_bandwidth_gbs: if med > 0.0 { matrix_bytes / med / 1e9 } else { 0.0 },
        padded_slots: p.padding().map_or(0, |(_, padded)| padded),
        skip_reason: String::new(),
    })
}

fn best_by<F: Fn(&BenchRow) -> f64>(rows: &[BenchRow], kind: RowKind, key: F) -> Option<BenchRow> {
    let mut best: Option<&BenchRow> = None;
    for r in rows.iter().filter(|r| r.kind == RowKind::Sweep) {
        if best.is_none_or(|b| key(r) < key(b)) {
            best = Some(r);
        }
    }
    best.map(|b| BenchRow { kind, ..b.clone() })
}

/// Every sweep row of one matrix followed, per kernel, by its argmin rows.
pub fn bench_matrix(name: &str, m: &SparseCsr, spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    let x = bench_vector(m.ncols(), spec.seed);
    let reference = spmv_csr_reference(m, &x)?;
    let mut out = Vec::new();
    for &kernel in &spec.kernels {
        let thresholds = if kernel.uses_threshold() {
            spec.thresholds_for(m)
        } else {
            vec![None]
        };
        let mut rows = Vec::new();
        for &ws in &spec.warp_sizes {
            for &bs in &spec.block_sizes {
                let cfg = WarpModelConfig {
                    warp_size: ws,
                    block_size: bs,
                    ..WarpModelConfig::default()
                };
                for &t in &thresholds {
                    let params = KernelParams {
                        k_ell: spec.k_ell,
                        threshold: t,
                    };
                    let row = measure(name, m, &x, &reference, kernel, &cfg, params, spec.iterations)?;
                    let skipped = row.kind == RowKind::Skipped;
                    rows.push(row);
                    if skipped {
                        break;
                    }
                }
            }
        }
        let best_time = best_by(&rows, RowKind::BestTime, |r| r.median_seconds);
        let best_tx = best_by(&rows, RowKind::BestTransactions, |r| r.tx_total as f64);
        out.extend(rows);
        out.extend(best_time);
        out.extend(best_tx);
    }
    Ok(out)
}

/// Runs the sweep over every matrix, loading each through `load`. Matrices
/// are benchmarked on separate threads when `jobs > 1`; row order follows
/// `spec.matrices` regardless.
pub fn run_bench<L>(spec: &BenchSpec, load: L, jobs: usize) -> Result<Vec<BenchRow>>
where
    L: Fn(&str) -> Result<SparseCsr> + Sync,
{
    spec.validate()?;
    let task = |name: &String| -> Result<Vec<BenchRow>> { bench_matrix(name, &load(name)?, spec) };
    let results: Vec<Result<Vec<BenchRow>>> = if jobs <= 1 {
        spec.matrices.iter().map(task).collect()
    } else {
        let chunk = spec.matrices.len().div_ceil(jobs);
        std::thread::scope(|s| {
            let handles: Vec<_> = spec
                .matrices
                .chunks(chunk)
                .map(|names| s.spawn(move || names.iter().map(task).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("bench worker panicked"))
                .collect()
        })
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}
