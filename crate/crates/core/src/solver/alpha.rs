use core::fmt;

use alloc::format;

use crate::{Error, Result};

/// Number of SPMV uses after which a reordered kernel has paid for its
/// reordering, or `Infinite` when it is never faster than the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Alpha {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaAnalysis {
    /// Seconds to move values into the reordered layout.
    pub t_reorder: f64,
    /// Seconds per SPMV of the reordered kernel.
    pub t_kernel: f64,
    /// Seconds per SPMV of the baseline kernel.
    pub t_base: f64,
    pub alpha: Alpha,
}

impl AlphaAnalysis {
    pub fn new(t_reorder: f64, t_kernel: f64, t_base: f64) -> Result<Self> {
        Ok(Self {
            t_reorder,
            t_kernel,
            t_base,
            alpha: compute_alpha(t_reorder, t_kernel, t_base)?,
        })
    }
}

fn pays_off(a: u64, t_reorder: f64, t_kernel: f64, t_base: f64) -> bool {
    let a = a as f64;
    t_reorder + a * t_kernel <= a * t_base
}

/// Smallest `a >= 1` with `t_reorder + a * t_kernel <= a * t_base`.
pub fn compute_alpha(t_reorder: f64, t_kernel: f64, t_base: f64) -> Result<Alpha> {
    for (name, t) in [("t_reorder", t_reorder), ("t_kernel", t_kernel), ("t_base", t_base)] {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be a finite non-negative time, got {t}"
            )));
        }
    }
    if t_kernel >= t_base {
        return Ok(Alpha::Infinite);
    }
    let estimate = libm::ceil(t_reorder / (t_base - t_kernel));
    if estimate.is_nan() || estimate >= u64::MAX as f64 / 2.0 {
        return Ok(Alpha::Finite(u64::MAX));
    }
    let mut a = (estimate as u64).max(1);
    while !pays_off(a, t_reorder, t_kernel, t_base) {
        a += 1;
    }
    while a > 1 && pays_off(a - 1, t_reorder, t_kernel, t_base) {
        a -= 1;
    }
    Ok(Alpha::Finite(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_cases() {
        assert_eq!(compute_alpha(10.0, 1.0, 2.0).unwrap(), Alpha::Finite(10));
        assert_eq!(compute_alpha(10.5, 1.0, 2.0).unwrap(), Alpha::Finite(11));
        assert_eq!(compute_alpha(0.0, 1.0, 2.0).unwrap(), Alpha::Finite(1));
        assert_eq!(compute_alpha(1.0, 2.0, 2.0).unwrap(), Alpha::Infinite);
        assert_eq!(compute_alpha(0.0, 3.0, 2.0).unwrap(), Alpha::Infinite);
        assert!(compute_alpha(-1.0, 1.0, 2.0).is_err());
        assert!(compute_alpha(f64::NAN, 1.0, 2.0).is_err());
        assert_eq!(Alpha::Infinite.to_string(), "inf");
    }

    proptest! {
        #[test]
        fn minimal_and_monotone(tr in 0.0f64..1e3, tk in 1e-6f64..1.0, gap in 1e-6f64..1.0, extra in 0.0f64..1e3) {
            let tb = tk + gap;
            let Alpha::Finite(a) = compute_alpha(tr, tk, tb).unwrap() else { panic!() };
            prop_assert!(a >= 1);
            prop_assert!(pays_off(a, tr, tk, tb));
            prop_assert!(a == 1 || !pays_off(a - 1, tr, tk, tb));
            prop_assert!(compute_alpha(tr + extra, tk, tb).unwrap() >= Alpha::Finite(a));
        }
    }
}
