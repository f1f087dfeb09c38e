use warpell_core::fem::{generate_tet_mesh, ApParams, FemConfig, FemProblem, NoObserver, State};
use warpell_core::matrix::laplacian3d;
use warpell_core::solver::{cg_solve_prepared, CgConfig, Preconditioner};
use warpell_core::{KernelId, KernelParams, PreparedSpmv, WarpModelConfig};

#[test]
fn unpreconditioned_and_jacobi_agree_on_solution() {
    let a = laplacian3d(6, 5, 4).unwrap();
    let b: Vec<f64> = (0..a.nrows()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let p = PreparedSpmv::prepare(KernelId::K2r, &a, &WarpModelConfig::default(), &KernelParams::default()).unwrap();
    let diag = a.diagonal();
    let jacobi = cg_solve_prepared(&p, &b, Some(&diag), &CgConfig::default()).unwrap();
    let plain = cg_solve_prepared(
        &p,
        &b,
        None,
        &CgConfig {
            preconditioner: Preconditioner::None,
            ..CgConfig::default()
        },
    )
    .unwrap();
    assert!(jacobi.converged && plain.converged);
    for (u, v) in jacobi.solution.iter().zip(&plain.solution) {
        assert!((u - v).abs() < 1e-6);
    }
}

#[test]
fn stimulus_spreads_and_recovers() {
    let mesh = generate_tet_mesh(6, 2, 2, 0.1, 8).unwrap();
    let mut problem = FemProblem::new(mesh, ApParams::default(), FemConfig::default()).unwrap();
    let mut s = State::with_potential(problem.mesh(), |x| if x[0] < 0.2 { 1.0 } else { 0.0 });
    let far: Vec<usize> = (0..problem.mesh().n_nodes())
        .filter(|&i| problem.mesh().nodes[i][0] > 0.9)
        .collect();
    let mut peak_far = 0.0f64;
    for _ in 0..200 {
        s = problem.timestep(&s, &mut NoObserver).unwrap().0;
        peak_far = far.iter().map(|&i| s.phi[i]).fold(peak_far, f64::max);
    }
    assert!(peak_far > 0.5, "the wave never reached the far face: {peak_far}");
    assert!(s.r.iter().all(|&r| r >= -1e-12));
}
