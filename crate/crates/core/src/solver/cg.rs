use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::ellwarp::Permutation;
use crate::formats::check_len;
use crate::kernel::PreparedSpmv;
use crate::simt::NoTrace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
    /// Recompute `r = b - A x` every this many iterations (one extra SPMV
    /// each time); 0 never recomputes.
    pub residual_refresh: usize,
    /// Abort once the relative residual exceeds this.
    pub divergence_limit: f64,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-8,
            max_iterations: 10_000,
            preconditioner: Preconditioner::Jacobi,
            residual_refresh: 0,
            divergence_limit: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖r_k‖ / ‖b‖` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Operator applications: one initial, one per iteration, one per refresh.
    pub spmv_count: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Solves `A x = b` from `x = 0`. `apply_a(x, y)` must write `y = A x`;
/// `diagonal` is required for the Jacobi preconditioner.
pub fn cg_solve<F>(
    mut apply_a: F,
    b: &[f64],
    diagonal: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgResult>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if cfg.rel_tolerance.is_nan() || cfg.rel_tolerance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            cfg.rel_tolerance
        )));
    }
    let n = b.len();
    let inv_diag: Vec<f64> = match (cfg.preconditioner, diagonal) {
        (Preconditioner::None, _) => vec![1.0; n],
        (Preconditioner::Jacobi, Some(d)) => {
            check_len(n, d.len())?;
            if let Some(i) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
                return Err(Error::Singular(d[i]));
            }
            d.iter().map(|v| 1.0 / v).collect()
        }
        (Preconditioner::Jacobi, None) => {
            return Err(Error::InvalidParameter(
                "Jacobi preconditioning needs the matrix diagonal".into(),
            ))
        }
    };
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            iteration: 0,
            relative_residual: f64::NAN,
        });
    }

    let mut x = vec![0.0; n];
    let mut q = vec![0.0; n];
    apply_a(&x, &mut q)?;
    let mut spmv_count = 1;
    let mut r: Vec<f64> = b.iter().zip(&q).map(|(bi, qi)| bi - qi).collect();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgResult {
            solution: x,
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
            spmv_count,
        });
    }
    let mut history = vec![norm(&r) / b_norm];
    if history[0] <= cfg.rel_tolerance {
        return Ok(CgResult {
            solution: x,
            iterations: 0,
            residual_history: history,
            converged: true,
            spmv_count,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for k in 1..=cfg.max_iterations {
        apply_a(&p, &mut q)?;
        spmv_count += 1;
        let pq = dot(&p, &q);
        let step = rz / pq;
        if !step.is_finite() {
            return Err(Error::Diverged {
                iteration: k,
                relative_residual: *history.last().unwrap_or(&f64::NAN),
            });
        }
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        if cfg.residual_refresh > 0 && k % cfg.residual_refresh == 0 {
            apply_a(&x, &mut q)?;
            spmv_count += 1;
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
        }
        let rel = norm(&r) / b_norm;
        history.push(rel);
        if !rel.is_finite() || rel > cfg.divergence_limit {
            return Err(Error::Diverged {
                iteration: k,
                relative_residual: rel,
            });
        }
        if rel <= cfg.rel_tolerance {
            return Ok(CgResult {
                solution: x,
                iterations: k,
                residual_history: history,
                converged: true,
                spmv_count,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgResult {
        solution: x,
        iterations: cfg.max_iterations,
        residual_history: history,
        converged: false,
        spmv_count,
    })
}

/// CG on a renumbered operator. `b` and `diagonal` are in the original
/// numbering; they are permuted once, every iteration runs in permuted
/// numbering, and the solution is permuted back once.
pub fn cg_solve_permuted<F>(
    apply_a_perm: F,
    b: &[f64],
    p: &Permutation,
    diagonal: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgResult>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let b_perm = p.permute(b)?;
    let d_perm = diagonal.map(|d| p.permute(d)).transpose()?;
    let mut res = cg_solve(apply_a_perm, &b_perm, d_perm.as_deref(), cfg)?;
    res.solution = p.unpermute(&res.solution)?;
    Ok(res)
}

/// CG with a prepared kernel, staying in the kernel's native numbering.
pub fn cg_solve_prepared(
    a: &PreparedSpmv,
    b: &[f64],
    diagonal: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgResult> {
    let apply = |x: &[f64], y: &mut [f64]| a.apply_native(x, y, &mut NoTrace);
    match a.permutation() {
        Some(p) => cg_solve_permuted(apply, b, p, diagonal, cfg),
        None => cg_solve(apply, b, diagonal, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelId, KernelParams};
    use crate::matrix::{laplacian3d, spmv_csr_reference, SparseCsr};
    use crate::simt::WarpModelConfig;

    fn csr_op(m: &SparseCsr) -> impl FnMut(&[f64], &mut [f64]) -> Result<()> + '_ {
        move |x, y| {
            y.copy_from_slice(&spmv_csr_reference(m, x)?);
            Ok(())
        }
    }

    #[test]
    fn identity_in_one_iteration() {
        let m = SparseCsr::identity(9);
        let b: Vec<f64> = (0..9).map(|i| i as f64 - 3.0).collect();
        let res = cg_solve(csr_op(&m), &b, Some(&m.diagonal()), &CgConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.solution, b);
        assert_eq!(res.spmv_count, 2);
    }

    #[test]
    fn laplacian_recovers_ones() {
        let m = laplacian3d(4, 4, 4).unwrap();
        let ones = vec![1.0; m.nrows()];
        let b = spmv_csr_reference(&m, &ones).unwrap();
        let res = cg_solve(csr_op(&m), &b, Some(&m.diagonal()), &CgConfig::default()).unwrap();
        assert!(res.converged && res.iterations <= m.nrows());
        assert!(res.solution.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let ax = spmv_csr_reference(&m, &res.solution).unwrap();
        let rr: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(rr / norm(&b) <= 1e-8);
    }

    #[test]
    fn spmv_count_formula() {
        let m = laplacian3d(6, 6, 6).unwrap();
        let b = vec![1.0; m.nrows()];
        for refresh in [0, 5] {
            let cfg = CgConfig {
                residual_refresh: refresh,
                preconditioner: Preconditioner::None,
                ..CgConfig::default()
            };
            let res = cg_solve(csr_op(&m), &b, None, &cfg).unwrap();
            let refreshes = res.iterations.checked_div(refresh).unwrap_or(0);
            assert_eq!(res.spmv_count, res.iterations + 1 + refreshes);
            assert_eq!(res.residual_history.len(), res.iterations + 1);
        }
    }

    #[test]
    fn jacobi_not_worse_on_laplacians() {
        for n in [3, 5, 8] {
            let m = laplacian3d(n, n, n).unwrap();
            let b: Vec<f64> = (0..m.nrows()).map(|i| 1.0 + (i % 3) as f64).collect();
            let plain = CgConfig {
                preconditioner: Preconditioner::None,
                ..CgConfig::default()
            };
            let a = cg_solve(csr_op(&m), &b, None, &plain).unwrap();
            let j = cg_solve(csr_op(&m), &b, Some(&m.diagonal()), &CgConfig::default()).unwrap();
            assert!(j.iterations <= a.iterations);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = laplacian3d(8, 8, 8).unwrap();
        let b = vec![1.0; m.nrows()];
        let cfg = CgConfig {
            max_iterations: 3,
            ..CgConfig::default()
        };
        let res = cg_solve(csr_op(&m), &b, Some(&m.diagonal()), &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
    }

    #[test]
    fn indefinite_operator_diverges() {
        let b = vec![1.0, 1.0];
        let op = |x: &[f64], y: &mut [f64]| {
            y[0] = x[0];
            y[1] = -x[1];
            Ok(())
        };
        let cfg = CgConfig {
            preconditioner: Preconditioner::None,
            ..CgConfig::default()
        };
        assert!(matches!(cg_solve(op, &b, None, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn missing_diagonal_rejected() {
        let m = SparseCsr::identity(2);
        assert!(cg_solve(csr_op(&m), &[1.0, 1.0], None, &CgConfig::default()).is_err());
    }

    #[test]
    fn permuted_matches_plain() {
        let m = laplacian3d(5, 4, 3).unwrap();
        let b: Vec<f64> = (0..m.nrows()).map(|i| (i as f64 * 0.7).cos()).collect();
        let d = m.diagonal();
        let plain = cg_solve(csr_op(&m), &b, Some(&d), &CgConfig::default()).unwrap();
        let k = PreparedSpmv::prepare(
            KernelId::K1rs,
            &m,
            &WarpModelConfig::default(),
            &KernelParams::default(),
        )
        .unwrap();
        let perm = cg_solve_prepared(&k, &b, Some(&d), &CgConfig::default()).unwrap();
        assert_eq!(plain.iterations, perm.iterations);
        for (a, b) in plain.residual_history.iter().zip(&perm.residual_history) {
            assert!((a - b).abs() <= 1e-10);
        }
        for (a, b) in plain.solution.iter().zip(&perm.solution) {
            assert!((a - b).abs() <= 1e-10);
        }
        let ident = cg_solve_permuted(
            csr_op(&m),
            &b,
            &Permutation::identity(m.nrows()),
            Some(&d),
            &CgConfig::default(),
        )
        .unwrap();
        assert_eq!(ident, plain);
    }
}
