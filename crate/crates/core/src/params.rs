//! Problem parameters for -(a |grad u|_2^2 + b) Lap u + u = f(x) |u|^(p-2) u on R^N.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameter tuple of the nonlocal problem. `f_min <= f(x) <= f_max` everywhere
/// and `f(x) -> f_inf` at infinity; the autonomous case has all three equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub f_inf: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl ProblemParams {
    /// Autonomous problem: f identically equal to `f_inf`.
    pub fn autonomous(n: u32, p: f64, a: f64, b: f64, f_inf: f64) -> Result<Self> {
        Self::new(n, p, a, b, f_inf, f_inf, f_inf)
    }

    pub fn new(n: u32, p: f64, a: f64, b: f64, f_inf: f64, f_min: f64, f_max: f64) -> Result<Self> {
        let params = ProblemParams { n, p, a, b, f_inf, f_min, f_max };
        params.validate()?;
        Ok(params)
    }

    /// Critical Sobolev exponent 2N/(N-2), infinite for N <= 2.
    pub fn two_star(&self) -> f64 {
        if self.n <= 2 { f64::INFINITY } else { 2.0 * self.n as f64 / (self.n as f64 - 2.0) }
    }

    /// Upper end of the admissible p interval, min(4, 2*).
    pub fn p_sup(&self) -> f64 {
        self.two_star().min(4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be a positive integer".into()));
        }
        if !(self.p > 2.0 && self.p < self.p_sup()) {
            return Err(Error::InvalidParams(format!(
                "p = {} outside (2, {}) for N = {}",
                self.p,
                self.p_sup(),
                self.n
            )));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParams(format!("a = {} must be >= 0", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParams(format!("b = {} must be > 0", self.b)));
        }
        let fs = [self.f_inf, self.f_min, self.f_max];
        if fs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidParams("f_inf, f_min, f_max must be finite and > 0".into()));
        }
        if !(self.f_min <= self.f_inf && self.f_inf <= self.f_max) {
            return Err(Error::InvalidParams(format!(
                "need f_min <= f_inf <= f_max, got {} / {} / {}",
                self.f_min, self.f_inf, self.f_max
            )));
        }
        Ok(())
    }

    pub fn with_a(&self, a: f64) -> Self {
        ProblemParams { a, ..*self }
    }
}

/// Surface measure of the unit sphere in R^N; N = 1 counts the two endpoints.
pub fn sphere_area(n: u32) -> f64 {
    // 2 pi^(N/2) / Gamma(N/2) via the half-integer Gamma recurrence
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half(n)
}

/// Gamma(N/2) for integer N >= 1 without pulling in a special-function crate.
fn gamma_half(n: u32) -> f64 {
    let mut x = n as f64 / 2.0;
    let mut acc = 1.0;
    // Gamma(x) = (x-1) Gamma(x-1) down to Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)
    while x > 1.25 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 1.0).abs() < 1e-9 {
        acc
    } else {
        acc * std::f64::consts::PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        // N=5: 8 pi^2 / 3
        assert!((sphere_area(5) - 8.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-11);
    }

    #[test]
    fn admissible_p_depends_on_dimension() {
        assert!(ProblemParams::autonomous(3, 3.9, 0.1, 1.0, 1.0).is_ok());
        assert!(ProblemParams::autonomous(5, 3.9, 0.1, 1.0, 1.0).is_err()); // 2* = 10/3
        assert!(ProblemParams::autonomous(5, 3.2, 0.1, 1.0, 1.0).is_ok());
        assert!(ProblemParams::autonomous(6, 3.0, 0.1, 1.0, 1.0).is_err()); // p = 2* exactly
        assert!(ProblemParams::autonomous(2, 2.0, 0.1, 1.0, 1.0).is_err());
        assert!(ProblemParams::autonomous(1, 4.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn f_ordering_enforced() {
        assert!(ProblemParams::new(1, 3.0, 0.1, 1.0, 1.0, 0.9, 1.2).is_ok());
        assert!(ProblemParams::new(1, 3.0, 0.1, 1.0, 1.0, 1.1, 1.2).is_err());
        assert!(ProblemParams::new(1, 3.0, 0.1, 1.0, 1.0, 0.9, 0.95).is_err());
        assert!(ProblemParams::new(1, 3.0, -0.1, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(1, 3.0, 0.1, 0.0, 1.0, 1.0, 1.0).is_err());
    }
}
