use crate::{Error, Result};

use super::ApParams;

fn guard(phi: f64, p: &ApParams) -> Result<f64> {
    let s = p.mu2 + phi;
    if s.abs() <= 1e-12 || !s.is_finite() {
        return Err(Error::Singular(s));
    }
    Ok(s)
}

/// `(f_phi, f_r)` of the two-variable model.
pub fn ap_sources(phi: f64, r: f64, p: &ApParams) -> Result<(f64, f64)> {
    let s = guard(phi, p)?;
    let f_phi = p.c * phi * (phi - p.alpha) * (1.0 - phi) - r * phi;
    let f_r = (p.gamma + p.mu1 * r / s) * (-r - p.c * phi * (phi - p.b - 1.0));
    Ok((f_phi, f_r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApTangents {
    pub dfphi_dphi: f64,
    pub dfphi_dr: f64,
    pub dfr_dphi: f64,
    pub dfr_dr: f64,
}

pub fn ap_tangents(phi: f64, r: f64, p: &ApParams) -> Result<ApTangents> {
    let s = guard(phi, p)?;
    let c = p.c;
    let dfphi_dphi = c
        * ((phi - p.alpha) * (1.0 - phi) + phi * (1.0 - phi) - phi * (phi - p.alpha))
        - r;
    let g = p.gamma + p.mu1 * r / s;
    let h = -r - c * phi * (phi - p.b - 1.0);
    let dfr_dphi = -p.mu1 * r / (s * s) * h + g * (-c * (2.0 * phi - p.b - 1.0));
    let dfr_dr = p.mu1 / s * h - g;
    Ok(ApTangents {
        dfphi_dphi,
        dfphi_dr: -phi,
        dfr_dphi,
        dfr_dr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalNewton {
    pub r: f64,
    pub iterations: usize,
}

/// Backward-Euler update of the recovery variable at fixed `phi`:
/// the root of `(r - r_n) / dt - f_r(phi, r)`.
pub fn local_newton_r(
    r_n: f64,
    phi: f64,
    p: &ApParams,
    tol: f64,
    max_it: usize,
) -> Result<LocalNewton> {
    let inv_dt = 1.0 / p.dt;
    let mut r = r_n;
    let mut residual = 0.0;
    for it in 0..=max_it {
        let (_, f_r) = ap_sources(phi, r, p)?;
        residual = (r - r_n) * inv_dt - f_r;
        if residual.abs() <= tol {
            return Ok(LocalNewton { r, iterations: it });
        }
        if it == max_it {
            break;
        }
        let k = inv_dt - ap_tangents(phi, r, p)?.dfr_dr;
        r -= residual / k;
    }
    Err(Error::LocalNewton {
        iterations: max_it,
        last: r,
        residual,
    })
}
