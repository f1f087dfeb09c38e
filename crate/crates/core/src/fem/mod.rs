//! Aliev-Panfilov mono-domain reaction-diffusion on linear tetrahedra.
//!
//! The nodal potential `phi` is the global unknown, solved by an outer
//! Newton iteration whose linear systems go through any registered SPMV
//! kernel. The recovery variable `r` lives at each element's single
//! integration point and is updated by a scalar Newton iteration inside
//! every element evaluation. Global assembly is a row sum over a warp
//! layout whose rows are the global nonzeros, so no two writers share a
//! destination.

mod assembly;
mod element;
mod mesh;
mod params;
mod sources;
mod step;

pub use assembly::{assemble_spmv, build_assembly_map, AssemblyMap};
pub use element::{element_kernel, ElementGeometry, ElementOutput, MassKind};
pub use mesh::{generate_tet_mesh, TetMesh};
pub use params::ApParams;
pub use sources::{ap_sources, ap_tangents, local_newton_r, ApTangents, LocalNewton};
pub use step::{
    AdaptiveDt, FemConfig, FemProblem, NoObserver, Phase, PhaseObserver, State, StepReport,
};
