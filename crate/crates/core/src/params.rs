//! Dimension-dependent constants of the mass-critical problem.

use crate::{Error, Result};

/// Problem parameters: dimension `N >= 2`, the mass-critical exponent
/// `p = 1 + 4/N` kept as an exact rational `(N+4)/N`, and the surface
/// measure `σ_N` of the unit (N-1)-sphere.
///
/// Exponent combinations that are exact rationals (`p+1 = (2N+4)/N`,
/// `2/(p-1) = N/2`, ...) are exposed as methods evaluating the integer
/// ratio in one rounding, so no float drift accumulates in identities
/// like `(1+α)^{-2/(p-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    n_dim: u32,
    /// Numerator of p after reduction.
    p_num: u32,
    /// Denominator of p after reduction.
    p_den: u32,
    sigma_n: f64,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Γ(k/2) for integer k >= 1, exact for the half-integer lattice.
fn gamma_half_integer(k: u32) -> f64 {
    // Γ(1/2) = sqrt(pi), Γ(1) = 1, Γ(x+1) = x Γ(x).
    let mut x = k as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc // x == 1
    }
}

impl ProblemParams {
    pub fn new(n_dim: u32) -> Result<Self> {
        if n_dim < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension N = {n_dim} out of range; N >= 2 required"
            )));
        }
        let g = gcd(n_dim + 4, n_dim);
        // σ_N = 2 π^{N/2} / Γ(N/2)
        let sigma_n = 2.0 * std::f64::consts::PI.powf(n_dim as f64 / 2.0)
            / gamma_half_integer(n_dim);
        Ok(Self {
            n_dim,
            p_num: (n_dim + 4) / g,
            p_den: n_dim / g,
            sigma_n,
        })
    }

    pub fn n_dim(&self) -> u32 {
        self.n_dim
    }

    /// N as f64, for formulas.
    pub fn nf(&self) -> f64 {
        self.n_dim as f64
    }

    /// The mass-critical exponent p = 1 + 4/N = (N+4)/N.
    pub fn p(&self) -> f64 {
        self.p_num as f64 / self.p_den as f64
    }

    /// p + 1 = (2N+4)/N.
    pub fn p_plus_one(&self) -> f64 {
        (2 * self.n_dim + 4) as f64 / self.n_dim as f64
    }

    /// p - 1 = 4/N.
    pub fn p_minus_one(&self) -> f64 {
        4.0 / self.n_dim as f64
    }

    /// 2/(p-1) = N/2, the exponent in `(1+α)^{-2/(p-1)} m₁`.
    pub fn two_over_p_minus_one(&self) -> f64 {
        self.n_dim as f64 / 2.0
    }

    /// Sobolev-critical exponent 2* = 2N/(N-2), defined for N >= 3.
    pub fn two_star(&self) -> Option<f64> {
        if self.n_dim >= 3 {
            Some(2.0 * self.n_dim as f64 / (self.n_dim as f64 - 2.0))
        } else {
            None
        }
    }

    /// Surface measure of the unit (N-1)-sphere.
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// Volume of the ball of radius r: σ_N r^N / N.
    pub fn ball_volume(&self, r: f64) -> f64 {
        self.sigma_n * r.powi(self.n_dim as i32) / self.n_dim as f64
    }

    /// Exact rational components of p, `(num, den)`.
    pub fn p_rational(&self) -> (u32, u32) {
        (self.p_num, self.p_den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_low_dimension() {
        assert!(ProblemParams::new(0).is_err());
        assert!(ProblemParams::new(1).is_err());
    }

    #[test]
    fn exponent_is_exact_rational() {
        let p2 = ProblemParams::new(2).unwrap();
        assert_eq!(p2.p_rational(), (3, 1));
        assert_eq!(p2.p(), 3.0);
        let p3 = ProblemParams::new(3).unwrap();
        assert_eq!(p3.p_rational(), (7, 3));
        let p4 = ProblemParams::new(4).unwrap();
        assert_eq!(p4.p_rational(), (2, 1));
        assert_eq!(p4.p(), 2.0);
        assert_eq!(p4.two_over_p_minus_one(), 2.0);
    }

    #[test]
    fn sphere_measures() {
        assert!((ProblemParams::new(2).unwrap().sigma_n() - 2.0 * PI).abs() < 1e-14);
        assert!((ProblemParams::new(3).unwrap().sigma_n() - 4.0 * PI).abs() < 1e-13);
        assert!((ProblemParams::new(4).unwrap().sigma_n() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((ProblemParams::new(5).unwrap().sigma_n() - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn two_star_only_above_two() {
        assert!(ProblemParams::new(2).unwrap().two_star().is_none());
        assert_eq!(ProblemParams::new(3).unwrap().two_star(), Some(6.0));
        assert_eq!(ProblemParams::new(4).unwrap().two_star(), Some(4.0));
    }
}
