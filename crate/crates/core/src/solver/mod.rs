//! Preconditioned conjugate gradient over any SPMV kernel, and the
//! reorder break-even count.

mod alpha;
mod cg;

pub use alpha::{compute_alpha, Alpha, AlphaAnalysis};
pub use cg::{
    cg_solve, cg_solve_permuted, cg_solve_prepared, CgConfig, CgResult, Preconditioner,
};
