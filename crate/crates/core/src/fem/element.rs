use super::mesh::tet_volume;
use super::{ap_sources, ap_tangents, local_newton_r, ApParams};
use crate::{Error, Result};

/// Volume and constant shape-function gradients of a linear tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub volume: f64,
    pub grads: [[f64; 3]; 4],
}

impl ElementGeometry {
    pub fn new(element: usize, x: &[[f64; 3]; 4]) -> Result<Self> {
        let volume = tet_volume(x);
        if volume.is_nan() || volume <= 0.0 {
            return Err(Error::DegenerateElement { element, volume });
        }
        let mut j = [[0.0; 3]; 3];
        for a in 0..3 {
            for (b, row) in j.iter_mut().enumerate() {
                row[a] = x[a + 1][b] - x[0][b];
            }
        }
        // j has columns x_a - x_0; rows of its inverse are the gradients of N_1..N_3.
        let det = 6.0 * volume;
        let inv = [
            [
                (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det,
                (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det,
                (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det,
            ],
            [
                (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det,
                (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det,
                (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det,
            ],
            [
                (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det,
                (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det,
                (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det,
            ],
        ];
        let mut grads = [[0.0; 3]; 4];
        grads[1..4].copy_from_slice(&inv);
        for b in 0..3 {
            grads[0][b] = -(inv[0][b] + inv[1][b] + inv[2][b]);
        }
        Ok(Self { volume, grads })
    }

    /// `V * grad N_I . D grad N_J`.
    pub fn stiffness(&self, d: &[[f64; 3]; 3]) -> [[f64; 4]; 4] {
        let mut l = [[0.0; 4]; 4];
        for (row, gi) in l.iter_mut().zip(&self.grads) {
            let mut dg = [0.0; 3];
            for (a, v) in dg.iter_mut().enumerate() {
                *v = (0..3).map(|b| d[a][b] * gi[b]).sum();
            }
            for (entry, gj) in row.iter_mut().zip(&self.grads) {
                *entry = self.volume * (0..3).map(|a| dg[a] * gj[a]).sum::<f64>();
            }
        }
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKind {
    /// `V/4` on the diagonal.
    #[default]
    Lumped,
    /// Single-point rule at the centroid: `V/16` everywhere (rank one).
    Centroid,
}

impl MassKind {
    fn entry(self, volume: f64, i: usize, j: usize) -> f64 {
        match self {
            MassKind::Lumped if i == j => volume / 4.0,
            MassKind::Lumped => 0.0,
            MassKind::Centroid => volume / 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementOutput {
    pub ke: [[f64; 4]; 4],
    pub re: [f64; 4],
    /// Recovery variable at the integration point for the current `phi_e`.
    pub r: f64,
    pub local_iterations: usize,
}

/// Residual and tangent of one element for backward Euler in time.
///
/// The source is sampled once at the centroid. Its linearization uses the
/// total derivative of `f_phi` along the locally converged `r(phi)`, so `ke`
/// is the exact derivative of `re` and stays symmetric.
#[allow(clippy::too_many_arguments)]
pub fn element_kernel(
    geom: &ElementGeometry,
    stiffness: &[[f64; 4]; 4],
    phi_e: &[f64; 4],
    phi_n_e: &[f64; 4],
    r_n: f64,
    p: &ApParams,
    mass: MassKind,
    local_tol: f64,
    local_max_it: usize,
) -> Result<ElementOutput> {
    let v = geom.volume;
    let inv_dt = 1.0 / p.dt;
    let phi_c = 0.25 * (phi_e[0] + phi_e[1] + phi_e[2] + phi_e[3]);
    let local = local_newton_r(r_n, phi_c, p, local_tol, local_max_it)?;
    let r = local.r;
    let (f_phi, _) = ap_sources(phi_c, r, p)?;
    let t = ap_tangents(phi_c, r, p)?;
    let dr_dphi = t.dfr_dphi / (inv_dt - t.dfr_dr);
    let dfphi_total = t.dfphi_dphi + t.dfphi_dr * dr_dphi;

    let mut ke = [[0.0; 4]; 4];
    let mut re = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            let m = mass.entry(v, i, j);
            ke[i][j] = m * inv_dt + stiffness[i][j] - v / 16.0 * dfphi_total;
            re[i] += m * (phi_e[j] - phi_n_e[j]) * inv_dt + stiffness[i][j] * phi_e[j];
        }
        re[i] -= v / 4.0 * f_phi;
    }
    Ok(ElementOutput {
        ke,
        re,
        r,
        local_iterations: local.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [[f64; 3]; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    #[test]
    fn reference_tet_laplacian() {
        let g = ElementGeometry::new(0, &UNIT).unwrap();
        assert!((g.volume - 1.0 / 6.0).abs() < 1e-15);
        let p = ApParams {
            d_iso: 2.0,
            ..ApParams::default()
        };
        let l = g.stiffness(&p.diffusion());
        let hand = [
            [3.0, -1.0, -1.0, -1.0],
            [-1.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((l[i][j] - 2.0 / 6.0 * hand[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn diffusion_and_source_off_gives_mass() {
        let g = ElementGeometry::new(0, &UNIT).unwrap();
        let p = ApParams {
            d_iso: 0.0,
            c: 0.0,
            ..ApParams::default()
        };
        let l = g.stiffness(&p.diffusion());
        let phi = [0.1, 0.2, 0.3, 0.4];
        let phi_n = [0.0, 0.1, 0.0, 0.2];
        for mass in [MassKind::Lumped, MassKind::Centroid] {
            // r_n = 0 keeps r = 0 because f_r vanishes with c = 0 and r = 0
            let out = element_kernel(&g, &l, &phi, &phi_n, 0.0, &p, mass, 1e-14, 10).unwrap();
            assert_eq!(out.r, 0.0);
            for i in 0..4 {
                let mut expect = 0.0;
                for j in 0..4 {
                    let m = mass.entry(g.volume, i, j);
                    assert!((out.ke[i][j] - m / p.dt).abs() < 1e-15);
                    expect += m * (phi[j] - phi_n[j]) / p.dt;
                }
                assert!((out.re[i] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        let mut x = UNIT;
        x[3] = [0.5, 0.5, 0.0];
        assert!(ElementGeometry::new(7, &x).is_err());
    }
}
