use alloc::vec;
use alloc::vec::Vec;

use super::{
    assemble_spmv, build_assembly_map, element_kernel, ApParams, AssemblyMap, ElementGeometry,
    MassKind, TetMesh,
};
use crate::formats::check_len;
use crate::kernel::{KernelId, KernelParams, PreparedSpmv, RefillMode};
use crate::matrix::SparseCsr;
use crate::simt::WarpModelConfig;
use crate::solver::{cg_solve_prepared, CgConfig};
use crate::{Error, Result};

/// Stages of one time step, reported to a [`PhaseObserver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// Element residuals, tangents and local recovery updates.
    Elements,
    /// Row sums that build the global tangent and residual.
    Assembly,
    /// Moving tangent values into the solver kernel's storage.
    Reorder,
    /// The preconditioned CG solve and the Newton update.
    Solve,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Elements, Phase::Assembly, Phase::Reorder, Phase::Solve];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Elements => "elements",
            Phase::Assembly => "assembly",
            Phase::Reorder => "reorder",
            Phase::Solve => "solve",
        }
    }
}

/// Receives phase boundaries; timing lives with the caller.
pub trait PhaseObserver {
    fn enter(&mut self, phase: Phase);
    fn leave(&mut self, phase: Phase);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl PhaseObserver for NoObserver {
    fn enter(&mut self, _: Phase) {}
    fn leave(&mut self, _: Phase) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemConfig {
    pub outer_tol: f64,
    /// Residual norm below which the outer iteration stops regardless of
    /// the relative reduction.
    pub outer_abs_tol: f64,
    pub outer_max_it: usize,
    pub inner_tol: f64,
    pub inner_max_it: usize,
    pub mass: MassKind,
    pub kernel: KernelId,
    pub kernel_params: KernelParams,
    pub warp: WarpModelConfig,
    pub cg: CgConfig,
    pub refill: RefillMode,
}

impl Default for FemConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-8,
            outer_abs_tol: 1e-14,
            outer_max_it: 25,
            inner_tol: 1e-10,
            inner_max_it: 25,
            mass: MassKind::Lumped,
            kernel: KernelId::K1,
            kernel_params: KernelParams::default(),
            warp: WarpModelConfig::default(),
            cg: CgConfig {
                rel_tolerance: 1e-12,
                ..CgConfig::default()
            },
            refill: RefillMode::BulkScatter,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Nodal potential.
    pub phi: Vec<f64>,
    /// Recovery variable per element integration point.
    pub r: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn resting(mesh: &TetMesh) -> Self {
        Self {
            phi: vec![0.0; mesh.n_nodes()],
            r: vec![0.0; mesh.n_elements()],
            time: 0.0,
        }
    }

    /// Resting state with `phi` set from node coordinates.
    pub fn with_potential(mesh: &TetMesh, phi_at: impl Fn([f64; 3]) -> f64) -> Self {
        Self {
            phi: mesh.nodes.iter().map(|&x| phi_at(x)).collect(),
            ..Self::resting(mesh)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub outer_iterations: usize,
    /// Global residual 2-norm before each Newton update and at convergence.
    pub residual_norms: Vec<f64>,
    pub cg_iterations: Vec<usize>,
    pub max_local_iterations: usize,
}

/// Halves `dt` after a failed step and doubles it after an easy one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveDt {
    pub dt_min: f64,
    pub dt_max: f64,
    /// Double `dt` when the outer iteration needed at most this many updates.
    pub grow_at_most: usize,
}

impl AdaptiveDt {
    pub fn after_success(&self, dt: f64, outer_iterations: usize) -> f64 {
        if outer_iterations <= self.grow_at_most {
            (2.0 * dt).min(self.dt_max)
        } else {
            dt
        }
    }

    /// Next `dt` to retry with, or `None` once below `dt_min`.
    pub fn after_failure(&self, dt: f64) -> Option<f64> {
        let half = 0.5 * dt;
        (half >= self.dt_min).then_some(half)
    }
}

/// Mesh, parameters and the reusable structures of the nested Newton solve.
#[derive(Debug, Clone)]
pub struct FemProblem {
    mesh: TetMesh,
    params: ApParams,
    config: FemConfig,
    geometry: Vec<ElementGeometry>,
    stiffness: Vec<[[f64; 4]; 4]>,
    map: AssemblyMap,
    tangent: SparseCsr,
    residual: Vec<f64>,
    ke_flat: Vec<f64>,
    re_flat: Vec<f64>,
    r_new: Vec<f64>,
    kernel: Option<PreparedSpmv>,
}

impl FemProblem {
    pub fn new(mesh: TetMesh, params: ApParams, config: FemConfig) -> Result<Self> {
        params.validate()?;
        let geometry = mesh.geometry()?;
        let d = params.diffusion();
        let stiffness = geometry.iter().map(|g| g.stiffness(&d)).collect();
        let map = build_assembly_map(&mesh, &config.warp)?;
        let tangent = map.pattern.clone();
        let ne = mesh.n_elements();
        let n = mesh.n_nodes();
        Ok(Self {
            mesh,
            params,
            config,
            geometry,
            stiffness,
            map,
            tangent,
            residual: vec![0.0; n],
            ke_flat: vec![0.0; 16 * ne],
            re_flat: vec![0.0; 4 * ne],
            r_new: vec![0.0; ne],
            kernel: None,
        })
    }

    pub fn mesh(&self) -> &TetMesh {
        &self.mesh
    }

    pub fn params(&self) -> &ApParams {
        &self.params
    }

    pub fn config(&self) -> &FemConfig {
        &self.config
    }

    pub fn assembly_map(&self) -> &AssemblyMap {
        &self.map
    }

    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        let params = ApParams { dt, ..self.params };
        params.validate()?;
        self.params = params;
        Ok(())
    }

    /// Global tangent from the last [`FemProblem::evaluate`].
    pub fn tangent(&self) -> &SparseCsr {
        &self.tangent
    }

    /// Global residual from the last [`FemProblem::evaluate`].
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    /// Recovery variables from the last [`FemProblem::evaluate`].
    pub fn recovery(&self) -> &[f64] {
        &self.r_new
    }

    /// Flat element tangents `e * 16 + i * 4 + j` from the last evaluation.
    pub fn element_tangents(&self) -> &[f64] {
        &self.ke_flat
    }

    pub fn element_residuals(&self) -> &[f64] {
        &self.re_flat
    }

    /// Evaluates every element at `phi` against the previous state and
    /// assembles the global tangent and residual. Returns the largest
    /// local Newton iteration count.
    pub fn evaluate<O: PhaseObserver>(
        &mut self,
        phi: &[f64],
        prev: &State,
        obs: &mut O,
    ) -> Result<usize> {
        check_len(self.mesh.n_nodes(), phi.len())?;
        check_len(self.mesh.n_nodes(), prev.phi.len())?;
        check_len(self.mesh.n_elements(), prev.r.len())?;
        obs.enter(Phase::Elements);
        let mut max_local = 0;
        for (e, tet) in self.mesh.elements.iter().enumerate() {
            let phi_e = tet.map(|i| phi[i]);
            let phi_n_e = tet.map(|i| prev.phi[i]);
            let out = element_kernel(
                &self.geometry[e],
                &self.stiffness[e],
                &phi_e,
                &phi_n_e,
                prev.r[e],
                &self.params,
                self.config.mass,
                self.config.inner_tol,
                self.config.inner_max_it,
            )?;
            for i in 0..4 {
                self.ke_flat[e * 16 + i * 4..e * 16 + i * 4 + 4].copy_from_slice(&out.ke[i]);
            }
            self.re_flat[e * 4..e * 4 + 4].copy_from_slice(&out.re);
            self.r_new[e] = out.r;
            max_local = max_local.max(out.local_iterations);
        }
        obs.leave(Phase::Elements);
        obs.enter(Phase::Assembly);
        let result = assemble_spmv(
            &mut self.map,
            &self.ke_flat,
            &self.re_flat,
            self.tangent.values_mut(),
            &mut self.residual,
        );
        obs.leave(Phase::Assembly);
        result?;
        Ok(max_local)
    }

    fn load_kernel(&mut self) -> Result<()> {
        match &mut self.kernel {
            Some(k) => k.refill(&self.tangent, self.config.refill),
            None => {
                self.kernel = Some(PreparedSpmv::prepare(
                    self.config.kernel,
                    &self.tangent,
                    &self.config.warp,
                    &self.config.kernel_params,
                )?);
                Ok(())
            }
        }
    }

    /// One backward-Euler step from `prev`.
    pub fn timestep<O: PhaseObserver>(
        &mut self,
        prev: &State,
        obs: &mut O,
    ) -> Result<(State, StepReport)> {
        let mut phi = prev.phi.clone();
        let mut report = StepReport::default();
        let mut r0 = 0.0;
        for it in 0..=self.config.outer_max_it {
            let local = self.evaluate(&phi, prev, obs)?;
            report.max_local_iterations = report.max_local_iterations.max(local);
            let norm = libm::sqrt(self.residual.iter().map(|v| v * v).sum::<f64>());
            report.residual_norms.push(norm);
            if it == 0 {
                r0 = norm;
            }
            if !norm.is_finite() {
                return Err(Error::OuterNewton {
                    iterations: it,
                    relative_residual: f64::NAN,
                });
            }
            if norm <= self.config.outer_abs_tol || norm <= self.config.outer_tol * r0 {
                report.outer_iterations = it;
                let next = State {
                    phi,
                    r: self.r_new.clone(),
                    time: prev.time + self.params.dt,
                };
                return Ok((next, report));
            }
            if it == self.config.outer_max_it {
                break;
            }
            obs.enter(Phase::Reorder);
            let loaded = self.load_kernel();
            obs.leave(Phase::Reorder);
            loaded?;
            obs.enter(Phase::Solve);
            let kernel = self.kernel.as_ref().expect("kernel loaded above");
            let diag = self.tangent.diagonal();
            let solved = cg_solve_prepared(kernel, &self.residual, Some(&diag), &self.config.cg);
            let solved = match solved {
                Ok(s) => s,
                Err(e) => {
                    obs.leave(Phase::Solve);
                    return Err(e);
                }
            };
            for (p, d) in phi.iter_mut().zip(&solved.solution) {
                *p -= d;
            }
            report.cg_iterations.push(solved.iterations);
            obs.leave(Phase::Solve);
        }
        Err(Error::OuterNewton {
            iterations: self.config.outer_max_it,
            relative_residual: report.residual_norms.last().copied().unwrap_or(f64::NAN)
                / if r0 > 0.0 { r0 } else { 1.0 },
        })
    }
}
