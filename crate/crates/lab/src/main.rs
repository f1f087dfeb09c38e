use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use warpell_core::fem::{generate_tet_mesh, ApParams, FemConfig};
use warpell_core::kernel::RefillMode;
use warpell_core::matrix::matrix_stats;
use warpell_core::solver::{cg_solve_prepared, CgConfig};
use warpell_core::{KernelId, KernelParams, PreparedSpmv, SparseCsr, WarpModelConfig};
use warpell_lab::alpha::{analyze_alpha, AlphaRow};
use warpell_lab::bench::{full_block_sweep, run_bench, BenchRow, BenchSpec, RowKind, ThresholdSweep, ITERATION_PRESETS};
use warpell_lab::fem_demo::{fem_demo, read_mesh_file, write_mesh_file, FemDemoSpec};
use warpell_lab::fetch::{default_cache_dir, fetch_matrix, load_matrix, HttpTransport, CATALOG};
use warpell_lab::report::{
    emit_report, load_rows, padding_row, row_histogram, FemTimingRow, Format, HistogramRow, PaddingRow, Report,
};

#[derive(Parser)]
#[command(name = "warpell", version, about = "Warp-granular sparse kernels: fetch, inspect, benchmark, solve")]
struct Cli {
    /// Matrix cache directory [default: $WARPELL_CACHE_DIR or ~/.cache/warpell]
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Seed for synthetic matrices and input vectors
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download catalog matrices into the cache
    Fetch {
        /// Catalog names; omit to list the catalog
        names: Vec<String>,
    },
    /// Row statistics and padding of each format
    Stats {
        matrices: Vec<String>,
        #[arg(long, default_value_t = 32)]
        warp_size: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sweep kernels and parameters and record timings and transactions
    Bench(BenchArgs),
    /// Reorder break-even analysis of a reordered kernel against a baseline
    Alpha {
        matrices: Vec<String>,
        #[arg(long, value_parser = parse_kernel, default_value = "k1")]
        kernel: KernelId,
        #[arg(long, value_parser = parse_kernel, default_value = "csr_vector")]
        baseline: KernelId,
        #[arg(long, value_enum, default_value_t = Mode::BulkScatter)]
        mode: Mode,
        #[arg(long, default_value_t = 21)]
        reps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Jacobi-preconditioned CG on A x = A·1 with each kernel
    Cg {
        #[arg(long, default_value = "synthetic:laplacian:12")]
        matrix: String,
        #[arg(long = "kernel", value_parser = parse_kernel, value_delimiter = ',')]
        kernels: Vec<KernelId>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Run implicit cardiac FEM steps and report per-phase time shares
    #[command(allow_negative_numbers = true)]
    FemDemo(FemArgs),
    /// Convert a report between CSV and JSON and summarize it
    Report {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        to: OutFormat,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Directory for report files; nothing is written when omitted
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// Matrix paths, catalog names or synthetic:<spec>
    #[arg(long = "matrix", required = true)]
    matrices: Vec<String>,
    /// Kernels to run [default: all]
    #[arg(long = "kernel", value_parser = parse_kernel, value_delimiter = ',')]
    kernels: Vec<KernelId>,
    #[arg(long = "warp-size", value_delimiter = ',', default_values_t = [32])]
    warp_sizes: Vec<usize>,
    #[arg(long = "block-size", value_delimiter = ',', default_values_t = [128])]
    block_sizes: Vec<usize>,
    /// Sweep block sizes 32..=256 in steps of 32
    #[arg(long)]
    full_blocks: bool,
    /// K2 thresholds: `default`, `full` (minrow..=maxrow) or a comma list
    #[arg(long, default_value = "default")]
    thresholds: String,
    /// ELL width of the HYB split [default: smallest width covering 2/3 of rows]
    #[arg(long)]
    k_ell: Option<usize>,
    #[arg(long, value_enum, default_value_t = Preset::Medium)]
    preset: Preset,
    /// Overrides the preset's iteration count
    #[arg(long)]
    iterations: Option<usize>,
    /// Matrices benchmarked concurrently
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FemArgs {
    /// Mesh file; a jittered unit-cube mesh is generated when omitted
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Cells per axis of the generated mesh
    #[arg(long, default_value_t = 6)]
    cells: usize,
    #[arg(long, default_value_t = 0.15)]
    jitter: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, value_parser = parse_kernel, default_value = "k1")]
    kernel: KernelId,
    /// Initial potential of the slab x <= 0.25
    #[arg(long, default_value_t = 1.0)]
    stimulus: f64,
    #[command(flatten)]
    model: ModelArgs,
    /// Relative reduction of the global residual ending each step
    #[arg(long, default_value_t = 1e-8)]
    outer_tol: f64,
    #[arg(long, default_value_t = 25)]
    outer_max_it: usize,
    /// Tolerance of the per-element recovery update
    #[arg(long, default_value_t = 1e-10)]
    inner_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    cg_tol: f64,
    #[arg(long, value_enum, default_value_t = Mode::BulkScatter)]
    refill: Mode,
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    /// Also save the mesh used
    #[arg(long)]
    write_mesh: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

/// Two-variable excitable model and diffusion parameters.
#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.15)]
    b: f64,
    #[arg(long, default_value_t = 8.0)]
    c: f64,
    #[arg(long, default_value_t = 0.002)]
    gamma: f64,
    #[arg(long, default_value_t = 0.2)]
    mu1: f64,
    #[arg(long, default_value_t = 0.3)]
    mu2: f64,
    #[arg(long, default_value_t = 0.01)]
    d_iso: f64,
    #[arg(long, default_value_t = 0.0)]
    d_ani: f64,
    /// Fiber direction as x,y,z
    #[arg(long, default_value = "1,0,0", value_parser = parse_vec3)]
    fiber: [f64; 3],
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
}

impl ModelArgs {
    fn params(&self) -> ApParams {
        ApParams {
            alpha: self.alpha,
            b: self.b,
            c: self.c,
            gamma: self.gamma,
            mu1: self.mu1,
            mu2: self.mu2,
            d_iso: self.d_iso,
            d_ani: self.d_ani,
            n_fiber: self.fiber,
            dt: self.dt,
        }
    }
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|_| format!("expected three comma-separated numbers, got '{s}'"))
}

impl From<Mode> for RefillMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::BulkScatter => RefillMode::BulkScatter,
            Mode::HostLoop => RefillMode::HostLoop,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Mode {
    BulkScatter,
    HostLoop,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 1 iteration
    Short,
    /// 50 iterations
    Medium,
    /// 1200 iterations
    Long,
}

fn parse_kernel(s: &str) -> std::result::Result<KernelId, String> {
    s.parse().map_err(|e: warpell_core::Error| e.to_string())
}

fn parse_thresholds(s: &str) -> Result<ThresholdSweep> {
    Ok(match s {
        "default" => ThresholdSweep::Default,
        "full" => ThresholdSweep::Full,
        list => ThresholdSweep::List(
            list.split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad threshold list '{list}'"))?,
        ),
    })
}

struct Env {
    cache_dir: PathBuf,
    seed: u64,
}

impl Env {
    fn load(&self, spec: &str) -> warpell_lab::Result<SparseCsr> {
        load_matrix(spec, &self.cache_dir, &HttpTransport, self.seed)
    }
}

fn emit(report: Report, out: &OutArgs) -> Result<()> {
    if let Some(dir) = &out.out_dir {
        let path = emit_report(&report, dir, out.format.into())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let env = Env {
        cache_dir: cli.cache_dir.unwrap_or_else(default_cache_dir),
        seed: cli.seed,
    };
    match cli.command {
        Command::Fetch { names } => fetch(&env, &names),
        Command::Stats { matrices, warp_size, out } => stats(&env, &matrices, warp_size, &out),
        Command::Bench(args) => bench(&env, args),
        Command::Alpha {
            matrices,
            kernel,
            baseline,
            mode,
            reps,
            out,
        } => {
            let mode = RefillMode::from(mode);
            let mut rows = Vec::new();
            for name in &matrices {
                let m = env.load(name)?;
                let a = analyze_alpha(&m, kernel, baseline, mode, &WarpModelConfig::default(), reps)?;
                let row = AlphaRow::new(name, &m, kernel, baseline, mode, reps, &a);
                println!(
                    "{name}: t_reorder {:.3e} s  t_{} {:.3e} s  t_{} {:.3e} s  alpha {}",
                    row.t_reorder, row.kernel, row.t_kernel, row.baseline, row.t_base, row.alpha
                );
                rows.push(row);
            }
            emit(Report::Alpha(rows), &out)
        }
        Command::Cg {
            matrix,
            kernels,
            tol,
            max_iterations,
        } => cg(&env, &matrix, kernels, tol, max_iterations),
        Command::FemDemo(args) => fem(&env, args),
        Command::Report { input, to, out_dir } => convert(&input, to, &out_dir),
    }
}

fn fetch(env: &Env, names: &[String]) -> Result<()> {
    if names.is_empty() {
        println!("{:<16} {:>10} {:>10} {:>7} {:>7}  source", "name", "nrows", "nnz", "minrow", "maxrow");
        for e in &CATALOG {
            let src = e.source.map_or("synthetic only".to_string(), |(g, n)| format!("{g}/{n}"));
            println!(
                "{:<16} {:>10} {:>10} {:>7} {:>7}  {src}",
                e.name, e.nrows, e.nnz, e.minrow, e.maxrow
            );
        }
        return Ok(());
    }
    for name in names {
        let path = fetch_matrix(name, &env.cache_dir, &HttpTransport)?;
        println!("{name}: {}", path.display());
    }
    Ok(())
}

fn stats(env: &Env, matrices: &[String], warp_size: usize, out: &OutArgs) -> Result<()> {
    if matrices.is_empty() {
        bail!("stats needs at least one matrix");
    }
    let cfg = WarpModelConfig::with_warp_size(warp_size);
    let mut padding: Vec<PaddingRow> = Vec::new();
    let mut histogram: Vec<HistogramRow> = Vec::new();
    for name in matrices {
        let m = env.load(name)?;
        let s = matrix_stats(&m);
        let p = padding_row(name, &m, &cfg)?;
        println!(
            "{name}: {}x{} nnz {} bytes {} rows {}..{} (mean {:.2}, median {})",
            s.nrows,
            s.ncols,
            s.nnz,
            s.bytes,
            s.minrow,
            s.maxrow,
            s.mean_nnz_per_row,
            s.median_row()
        );
        println!(
            "  padded slots: ell {} hyb {} k1-unsorted {} k1 {} k2(T={}) {}; sorting removes {:.2}%",
            p.ell_padded, p.hyb_padded, p.k1_unsorted_padded, p.k1_padded, p.k2_threshold, p.k2_padded,
            p.padding_difference_pct
        );
        histogram.extend(row_histogram(name, &m));
        padding.push(p);
    }
    emit(Report::Padding(padding), out)?;
    emit(Report::Histogram(histogram), out)
}

fn bench(env: &Env, args: BenchArgs) -> Result<()> {
    let iterations = args.iterations.unwrap_or(match args.preset {
        Preset::Short => ITERATION_PRESETS[0],
        Preset::Medium => ITERATION_PRESETS[1],
        Preset::Long => ITERATION_PRESETS[2],
    });
    let spec = BenchSpec {
        matrices: args.matrices,
        kernels: if args.kernels.is_empty() {
            KernelId::ALL.to_vec()
        } else {
            args.kernels
        },
        warp_sizes: args.warp_sizes,
        block_sizes: if args.full_blocks {
            full_block_sweep()
        } else {
            args.block_sizes
        },
        thresholds: parse_thresholds(&args.thresholds)?,
        k_ell: args.k_ell,
        iterations,
        seed: env.seed,
    };
    let rows = run_bench(&spec, |name| env.load(name), args.jobs)?;
    print_bench(&rows);
    emit(Report::Bandwidth(rows), &args.out)
}

fn print_bench(rows: &[BenchRow]) {
    println!(
        "{:<24} {:<10} {:<17} {:>4} {:>4} {:>5} {:>12} {:>10} {:>7} {:>10}",
        "matrix", "kernel", "row", "ws", "bs", "T", "median s", "tx", "util", "padded"
    );
    for r in rows {
        if r.kind == RowKind::Skipped {
            println!("{:<24} {:<10} skipped: {}", r.matrix, r.kernel, r.skip_reason);
            continue;
        }
        let kind = match r.kind {
            RowKind::Sweep => "sweep",
            RowKind::BestTime => "best_time",
            RowKind::BestTransactions => "best_transactions",
            RowKind::Skipped => unreachable!(),
        };
        let t = r.threshold.map_or("-".to_string(), |t| t.to_string());
        println!(
            "{:<24} {:<10} {:<17} {:>4} {:>4} {:>5} {:>12.4e} {:>10} {:>7.4} {:>10}",
            r.matrix, r.kernel, kind, r.warp_size, r.block_size, t, r.median_seconds, r.tx_total,
            r.matrix_utilization, r.padded_slots
        );
    }
}

fn cg(env: &Env, matrix: &str, kernels: Vec<KernelId>, tol: f64, max_iterations: usize) -> Result<()> {
    let m = env.load(matrix)?;
    let ones = vec![1.0; m.ncols()];
    let b = warpell_core::matrix::spmv_csr_reference(&m, &ones)?;
    let diag = m.diagonal();
    let cfg = CgConfig {
        rel_tolerance: tol,
        max_iterations,
        ..CgConfig::default()
    };
    let kernels = if kernels.is_empty() { KernelId::ALL.to_vec() } else { kernels };
    for k in kernels {
        let p = PreparedSpmv::prepare(k, &m, &WarpModelConfig::default(), &KernelParams::default())?;
        let res = cg_solve_prepared(&p, &b, Some(&diag), &cfg)?;
        let err = res.solution.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        println!(
            "{:<10} converged {} iterations {} spmvs {} final rel residual {:.3e} max error {:.3e}",
            k.name(),
            res.converged,
            res.iterations,
            res.spmv_count,
            res.residual_history.last().copied().unwrap_or(0.0),
            err
        );
    }
    Ok(())
}

fn fem(env: &Env, args: FemArgs) -> Result<()> {
    let mesh = match &args.mesh {
        Some(path) => read_mesh_file(path)?,
        None => generate_tet_mesh(args.cells, args.cells, args.cells, args.jitter, env.seed)?,
    };
    if let Some(path) = &args.write_mesh {
        write_mesh_file(&mesh, path)?;
    }
    println!("mesh: {} nodes, {} elements", mesh.n_nodes(), mesh.n_elements());
    let params = args.model.params();
    params.validate()?;
    let spec = FemDemoSpec {
        steps: args.steps,
        config: FemConfig {
            kernel: args.kernel,
            outer_tol: args.outer_tol,
            outer_max_it: args.outer_max_it,
            inner_tol: args.inner_tol,
            cg: CgConfig {
                rel_tolerance: args.cg_tol,
                ..CgConfig::default()
            },
            refill: args.refill.into(),
            ..FemConfig::default()
        },
        params,
        stimulus: args.stimulus,
        checkpoint_every: args.checkpoint_every,
        ..FemDemoSpec::default()
    };
    let out = fem_demo(mesh, &spec, args.out.out_dir.as_deref())?;
    for r in &out.timing {
        println!("{:<9} {:>10.4} s {:>7.2}%", r.phase, r.seconds, 100.0 * r.share);
    }
    let peak = out.final_state.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("t = {:.3}, peak potential {:.6}", out.final_state.time, peak);
    for p in &out.checkpoints {
        println!("checkpoint {}", p.display());
    }
    emit(Report::FemTiming(out.timing), &args.out)
}

fn convert(input: &Path, to: OutFormat, out_dir: &Path) -> Result<()> {
    let kind = input
        .file_stem()
        .and_then(|s| s.to_str())
        .context("report file needs a name like bandwidth.csv")?;
    let report = match kind {
        "bandwidth" => Report::Bandwidth(load_rows(input)?),
        "padding" => Report::Padding(load_rows(input)?),
        "alpha" => Report::Alpha(load_rows(input)?),
        "fem_timing" => Report::FemTiming(load_rows::<FemTimingRow>(input)?),
        "histogram" => Report::Histogram(load_rows(input)?),
        other => bail!("unknown report kind '{other}' (bandwidth, padding, alpha, fem_timing, histogram)"),
    };
    println!("{}: {} rows", report.kind(), report.len());
    if let Report::Bandwidth(rows) = &report {
        for r in rows.iter().filter(|r| r.kind == RowKind::BestTransactions) {
            println!(
                "  {} {}: fewest transactions {} at ws {} bs {} T {:?}",
                r.matrix, r.kernel, r.tx_total, r.warp_size, r.block_size, r.threshold
            );
        }
    }
    let path = emit_report(&report, out_dir, to.into())?;
    println!("wrote {}", path.display());
    Ok(())
}
