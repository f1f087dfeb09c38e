//! Mesh files, state checkpoints and the timed FEM driver.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use warpell_core::fem::{ApParams, FemConfig, FemProblem, Phase, PhaseObserver, State, TetMesh};

use crate::error::{io_err, LabError, Result};
use crate::report::FemTimingRow;

const MESH_HEADER: &str = "warpell-mesh 1";
const CHECKPOINT_MAGIC: &[u8; 8] = b"WPELCKP1";

fn parse_err(line: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        line,
        message: message.into(),
    }
}

/// Writes a mesh as text:
///
/// ```text
/// warpell-mesh 1
/// nodes <n>
/// <x> <y> <z>      (n lines)
/// elements <e>
/// <a> <b> <c> <d>  (e lines, 0-based node ids)
/// ```
pub fn write_mesh<W: Write>(mesh: &TetMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MESH_HEADER}")?;
    writeln!(w, "nodes {}", mesh.n_nodes())?;
    for [x, y, z] in &mesh.nodes {
        writeln!(w, "{x:e} {y:e} {z:e}")?;
    }
    writeln!(w, "elements {}", mesh.n_elements())?;
    for [a, b, c, d] in &mesh.elements {
        writeln!(w, "{a} {b} {c} {d}")?;
    }
    Ok(())
}

pub fn write_mesh_file(mesh: &TetMesh, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    write_mesh(mesh, &mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<TetMesh> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(parse_err(n, e.to_string())),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let (n, header) = next("header")?;
    if header.trim() != MESH_HEADER {
        return Err(parse_err(n, format!("expected '{MESH_HEADER}'")));
    }
    let count = |line: (usize, String), key: &str| -> Result<usize> {
        let (n, l) = line;
        l.trim()
            .strip_prefix(key)
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| parse_err(n, format!("expected '{key} <count>'")))
    };
    let n_nodes = count(next("node count")?, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (n, l) = next("node")?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(n, format!("bad coordinate: {e}")))?;
        let [x, y, z] = v[..] else {
            return Err(parse_err(n, "expected three coordinates"));
        };
        nodes.push([x, y, z]);
    }
    let n_elements = count(next("element count")?, "elements")?;
    let mut elements = Vec::with_capacity(n_elements);
    for _ in 0..n_elements {
        let (n, l) = next("element")?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(n, format!("bad node id: {e}")))?;
        let [a, b, c, d] = v[..] else {
            return Err(parse_err(n, "expected four node ids"));
        };
        elements.push([a, b, c, d]);
    }
    Ok(TetMesh::new(nodes, elements)?)
}

pub fn read_mesh_file(path: &Path) -> Result<TetMesh> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_mesh(BufReader::new(file))
}

/// Binary checkpoint: magic, time, `phi` and `r`, all little-endian with
/// u64 length prefixes.
pub fn write_checkpoint(state: &State, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 8 * (state.phi.len() + state.r.len()));
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&state.time.to_le_bytes());
    for v in [&state.phi, &state.r] {
        buf.extend_from_slice(&(v.len() as u64).to_le_bytes());
        for x in v.iter() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(io_err(path))
}

pub fn read_checkpoint(path: &Path) -> Result<State> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    let bad = |msg: &str| parse_err(0, format!("{}: {msg}", path.display()));
    let mut rest = bytes
        .strip_prefix(CHECKPOINT_MAGIC.as_slice())
        .ok_or_else(|| bad("not a checkpoint"))?;
    let mut word = || -> Result<[u8; 8]> {
        let (head, tail) = rest.split_first_chunk::<8>().ok_or_else(|| bad("truncated"))?;
        rest = tail;
        Ok(*head)
    };
    let time = f64::from_le_bytes(word()?);
    let mut vector = || -> Result<Vec<f64>> {
        let n = u64::from_le_bytes(word()?) as usize;
        (0..n).map(|_| word().map(f64::from_le_bytes)).collect()
    };
    let phi = vector()?;
    let r = vector()?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes"));
    }
    Ok(State { phi, r, time })
}

/// Accumulates wall time per phase.
#[derive(Debug, Default)]
pub struct PhaseTimer {
    open: BTreeMap<Phase, Instant>,
    pub totals: BTreeMap<Phase, Duration>,
}

impl PhaseObserver for PhaseTimer {
    fn enter(&mut self, phase: Phase) {
        self.open.insert(phase, Instant::now());
    }

    fn leave(&mut self, phase: Phase) {
        if let Some(start) = self.open.remove(&phase) {
            *self.totals.entry(phase).or_default() += start.elapsed();
        }
    }
}

#[derive(Debug, Clone)]
pub struct FemDemoSpec {
    pub steps: usize,
    /// Solver settings, including the SPMV kernel.
    pub config: FemConfig,
    pub params: ApParams,
    /// Initial potential inside the stimulus slab `x <= stimulus_width`;
    /// zero leaves the tissue at rest.
    pub stimulus: f64,
    pub stimulus_width: f64,
    /// Write a checkpoint every this many steps (and after the last one);
    /// 0 writes only the final state.
    pub checkpoint_every: usize,
}

impl Default for FemDemoSpec {
    fn default() -> Self {
        Self {
            steps: 10,
            config: FemConfig::default(),
            params: ApParams::default(),
            stimulus: 1.0,
            stimulus_width: 0.25,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FemDemoOutput {
    pub initial: State,
    pub final_state: State,
    pub timing: Vec<FemTimingRow>,
    pub total_seconds: f64,
    pub checkpoints: Vec<PathBuf>,
    pub outer_iterations: Vec<usize>,
}

/// Runs `spec.steps` implicit steps on `mesh` and returns per-phase time
/// shares. Time outside the four phases is reported as phase `other`.
pub fn fem_demo(mesh: TetMesh, spec: &FemDemoSpec, out_dir: Option<&Path>) -> Result<FemDemoOutput> {
    let kernel = spec.config.kernel;
    let mut problem = FemProblem::new(mesh, spec.params, spec.config.clone())?;
    let (amp, width) = (spec.stimulus, spec.stimulus_width);
    let initial = State::with_potential(problem.mesh(), |x| if x[0] <= width { amp } else { 0.0 });
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut timer = PhaseTimer::default();
    let mut checkpoints = Vec::new();
    let mut outer_iterations = Vec::with_capacity(spec.steps);
    let mut state = initial.clone();
    let started = Instant::now();
    for step in 1..=spec.steps {
        let (next, report) = problem
            .timestep(&state, &mut timer)
            .map_err(|source| LabError::Step { step, source })?;
        state = next;
        outer_iterations.push(report.outer_iterations);
        let due = spec.checkpoint_every > 0 && step % spec.checkpoint_every == 0;
        if let Some(dir) = out_dir.filter(|_| due || step == spec.steps) {
            let path = dir.join(format!("step_{step:05}.ckpt"));
            write_checkpoint(&state, &path)?;
            checkpoints.push(path);
        }
    }
    let total = started.elapsed().as_secs_f64();
    let mut timing: Vec<FemTimingRow> = Phase::ALL
        .iter()
        .map(|&p| (p.name(), timer.totals.get(&p).map_or(0.0, Duration::as_secs_f64)))
        .map(|(phase, seconds)| FemTimingRow {
            kernel: kernel.name().to_string(),
            steps: spec.steps,
            phase: phase.to_string(),
            seconds,
            share: 0.0,
        })
        .collect();
    let in_phases: f64 = timing.iter().map(|r| r.seconds).sum();
    timing.push(FemTimingRow {
        kernel: kernel.name().to_string(),
        steps: spec.steps,
        phase: "other".into(),
        seconds: (total - in_phases).max(0.0),
        share: 0.0,
    });
    let denom: f64 = timing.iter().map(|r| r.seconds).sum();
    for r in &mut timing {
        r.share = if denom > 0.0 { r.seconds / denom } else { 0.0 };
    }
    Ok(FemDemoOutput {
        initial,
        final_state: state,
        timing,
        total_seconds: denom,
        checkpoints,
        outer_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use warpell_core::fem::generate_tet_mesh;
    use warpell_core::KernelId;

    fn mesh() -> TetMesh {
        generate_tet_mesh(3, 3, 2, 0.1, 4).unwrap()
    }

    #[test]
    fn mesh_text_round_trip() {
        let m = mesh();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.elements, m.elements);
    }

    #[test]
    fn mesh_errors_carry_lines() {
        let text = "warpell-mesh 1\nnodes 1\n0 0\n";
        let e = read_mesh(text.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(read_mesh("nope\n".as_bytes()).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let s = State {
            phi: vec![0.1, -2.5e-300, f64::MAX],
            r: vec![1.0 / 3.0],
            time: 0.7,
        };
        let p = dir.path().join("s.ckpt");
        write_checkpoint(&s, &p).unwrap();
        assert_eq!(read_checkpoint(&p).unwrap(), s);
        fs::write(&p, b"WPELCKP1abc").unwrap();
        assert!(read_checkpoint(&p).is_err());
    }

    #[test]
    fn zero_stimulus_step_leaves_state_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FemDemoSpec {
            steps: 1,
            stimulus: 0.0,
            ..FemDemoSpec::default()
        };
        let out = fem_demo(mesh(), &spec, Some(dir.path())).unwrap();
        let saved = read_checkpoint(&out.checkpoints[0]).unwrap();
        assert_eq!(saved.phi, out.initial.phi);
        assert_eq!(saved.r, out.initial.r);
    }

    #[test]
    fn shares_sum_to_one() {
        let spec = FemDemoSpec {
            steps: 3,
            ..FemDemoSpec::default()
        };
        let out = fem_demo(mesh(), &spec, None).unwrap();
        let sum: f64 = out.timing.iter().map(|r| r.share).sum();
        assert!((sum - 1.0).abs() < 1e-3);
        let secs: f64 = out.timing.iter().map(|r| r.seconds).sum();
        assert!((secs - out.total_seconds).abs() <= 1e-3 * out.total_seconds);
        assert_eq!(out.timing.len(), 5);
    }

    #[test]
    fn kernel_swap_keeps_final_state() {
        let run = |kernel| {
            let spec = FemDemoSpec {
                steps: 4,
                config: FemConfig {
                    kernel,
                    ..FemConfig::default()
                },
                ..FemDemoSpec::default()
            };
            fem_demo(mesh(), &spec, None).unwrap().final_state
        };
        let a = run(KernelId::K1);
        for k in [KernelId::CsrRef, KernelId::K2rs, KernelId::Hyb] {
            let b = run(k);
            for (p, q) in a.phi.iter().zip(&b.phi) {
                assert!((p - q).abs() <= 1e-10, "{k}: {p} vs {q}");
            }
        }
    }
}
