use alloc::format;

use crate::{Error, Result};

/// Model and discretization parameters.
///
/// The defaults are common literature values for the Aliev-Panfilov model
/// in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApParams {
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub d_iso: f64,
    pub d_ani: f64,
    /// Fiber direction, unit length.
    pub n_fiber: [f64; 3],
    pub dt: f64,
}

impl Default for ApParams {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            b: 0.15,
            c: 8.0,
            gamma: 0.002,
            mu1: 0.2,
            mu2: 0.3,
            d_iso: 0.01,
            d_ani: 0.0,
            n_fiber: [1.0, 0.0, 0.0],
            dt: 0.1,
        }
    }
}

impl ApParams {
    pub fn validate(&self) -> Result<()> {
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        let n = self.n_fiber;
        let len2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
        if (libm::sqrt(len2) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "fiber direction must have unit length, got {}",
                libm::sqrt(len2)
            )));
        }
        let all = [
            self.alpha, self.b, self.c, self.gamma, self.mu1, self.mu2, self.d_iso, self.d_ani,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(())
    }

    /// `D = d_iso I + d_ani n n^T`.
    pub fn diffusion(&self) -> [[f64; 3]; 3] {
        let n = self.n_fiber;
        let mut d = [[0.0; 3]; 3];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.d_ani * n[i] * n[j] + if i == j { self.d_iso } else { 0.0 };
            }
        }
        d
    }
}
