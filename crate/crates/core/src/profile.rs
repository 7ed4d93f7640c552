//! Plateau profiles `a(s)`: even C² functions vanishing near 0 and ∞,
//! equal to a constant `α ∈ [-½, ½]` on `[1/L, L]`, with `|a'(s)s|`
//! bounded by `1/(2N²)`. They perturb the power nonlinearity through
//! `H(s) = a(s)|s|^{p+1}/(p+1)`.
//!
//! Construction: in the log coordinate `ℓ = log s` the raw profile is a
//! trapezoid (linear ramps of slope `±τ`, `τ = 1/(2N²)`, between the
//! plateau `[-log(L+1), log(L+1)]` and zero), written as a sum of hinge
//! functions. Smoothing is the exact convolution of each hinge with the
//! polynomial kernel `k(y) = (35/32)(1-y²)³` of radius `mollify_eps`,
//! so every profile property can be checked in closed form.

use crate::params::ProblemParams;
use crate::{Error, Result};

/// Smoothed plateau profile; see the module docs for the construction.
#[derive(Debug, Clone)]
pub struct ProfileA {
    alpha: f64,
    l_width: f64,
    tau: f64,
    mollify_eps: f64,
    /// Hinge breakpoints in log s (empty for the zero profile).
    breaks: Vec<f64>,
    /// Slope jumps at the breakpoints.
    coeffs: Vec<f64>,
}

/// Kernel CDF: `K(t) = ∫_{-1}^t (35/32)(1-y²)³ dy`, clamped outside.
fn kernel_cdf(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        0.5 + (35.0 / 32.0) * (t - t.powi(3) + 0.6 * t.powi(5) - t.powi(7) / 7.0)
    }
}

/// Hinge `x ↦ max(x, 0)` convolved with the kernel at radius `eps`.
fn smoothed_hinge(x: f64, eps: f64) -> f64 {
    if x <= -eps {
        0.0
    } else if x >= eps {
        x
    } else {
        let t = x / eps;
        x * kernel_cdf(t) + eps * (35.0 / 256.0) * (1.0 - t * t).powi(4)
    }
}

/// Build a profile with plateau value `alpha` on `[1/L, L]`.
///
/// `mollify_eps` is the smoothing radius in log s; pass `None` for half
/// the largest admissible radius. A radius that would erode the plateau
/// is rejected.
pub fn make_profile_a(
    alpha: f64,
    l_width: f64,
    params: ProblemParams,
    mollify_eps: Option<f64>,
) -> Result<ProfileA> {
    if !alpha.is_finite() || alpha.abs() > 0.5 {
        return Err(Error::InvalidInput(format!(
            "plateau value alpha = {alpha} outside [-1/2, 1/2]"
        )));
    }
    if !(l_width > 1.0) {
        return Err(Error::InvalidInput(format!(
            "plateau width L = {l_width} must exceed 1"
        )));
    }
    let max_eps = ((l_width + 1.0) / l_width).ln();
    let eps = mollify_eps.unwrap_or(0.5 * max_eps);
    if !(eps > 0.0) || eps >= max_eps {
        return Err(Error::PlateauDestroyed {
            eps,
            l: l_width,
            max_eps,
        });
    }
    let tau = 1.0 / (2.0 * params.nf() * params.nf());
    if alpha == 0.0 {
        return Ok(ProfileA {
            alpha,
            l_width,
            tau,
            mollify_eps: eps,
            breaks: Vec::new(),
            coeffs: Vec::new(),
        });
    }
    let sigma = alpha.signum();
    let ramp = alpha.abs() / tau;
    let lam = (l_width + 1.0).ln();
    let breaks = vec![-ramp - lam, -lam, lam, ramp + lam];
    let coeffs = vec![sigma * tau, -sigma * tau, -sigma * tau, sigma * tau];
    Ok(ProfileA {
        alpha,
        l_width,
        tau,
        mollify_eps: eps,
        breaks,
        coeffs,
    })
}

impl ProfileA {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn l_width(&self) -> f64 {
        self.l_width
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mollify_eps(&self) -> f64 {
        self.mollify_eps
    }

    /// a evaluated at log s. The settled plateau returns `alpha`
    /// directly, so it is exact rather than a sum of cancelling hinges.
    fn eval_log(&self, ell: f64) -> f64 {
        if ell >= self.breaks[1] + self.mollify_eps && ell <= self.breaks[2] - self.mollify_eps
        {
            return self.alpha;
        }
        self.breaks
            .iter()
            .zip(&self.coeffs)
            .map(|(&b, &c)| c * smoothed_hinge(ell - b, self.mollify_eps))
            .sum()
    }

    /// da/d(log s) at log s.
    fn slope_log(&self, ell: f64) -> f64 {
        self.breaks
            .iter()
            .zip(&self.coeffs)
            .map(|(&b, &c)| c * kernel_cdf((ell - b) / self.mollify_eps))
            .sum()
    }

    /// a(s); even, zero at s = 0.
    pub fn eval(&self, s: f64) -> f64 {
        let t = s.abs();
        if t == 0.0 || self.breaks.is_empty() {
            return 0.0;
        }
        let ell = t.ln();
        if ell <= self.breaks[0] - self.mollify_eps
            || ell >= self.breaks[3] + self.mollify_eps
        {
            return 0.0;
        }
        self.eval_log(ell)
    }

    /// a'(s); odd. Equals `(da/dlog s)/s` for s > 0.
    pub fn deriv(&self, s: f64) -> f64 {
        let t = s.abs();
        if t == 0.0 || self.breaks.is_empty() {
            return 0.0;
        }
        let ell = t.ln();
        if ell <= self.breaks[0] - self.mollify_eps
            || ell >= self.breaks[3] + self.mollify_eps
        {
            return 0.0;
        }
        s.signum() * self.slope_log(ell) / t
    }

    /// `|a'(s) s|` at s, the quantity bounded by `1/N²`.
    pub fn log_slope_abs(&self, s: f64) -> f64 {
        let t = s.abs();
        if t == 0.0 || self.breaks.is_empty() {
            return 0.0;
        }
        self.slope_log(t.ln()).abs()
    }

    /// Support in s > 0, `None` for the zero profile.
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.breaks.is_empty() {
            None
        } else {
            Some((
                (self.breaks[0] - self.mollify_eps).exp(),
                (self.breaks[3] + self.mollify_eps).exp(),
            ))
        }
    }

    /// Re-verify the four defining properties on a dense log sample.
    pub fn verify_properties(&self, n_sample: usize) -> Result<()> {
        let n_sq_inv = 2.0 * self.tau; // 1/N²
        for i in 0..n_sample {
            let ell = -16.0 + 32.0 * i as f64 / (n_sample - 1) as f64;
            let s = ell.exp();
            let a = self.eval(s);
            if a.abs() > 0.5 + 1e-14 {
                return Err(Error::ConvergenceFailure(format!(
                    "profile bound violated: a({s}) = {a}"
                )));
            }
            if self.alpha != 0.0 && (a - self.alpha) * self.alpha.signum() > 1e-14 {
                return Err(Error::ConvergenceFailure(format!(
                    "profile exceeds plateau value at s = {s}"
                )));
            }
            if self.log_slope_abs(s) >= n_sq_inv {
                return Err(Error::ConvergenceFailure(format!(
                    "|a'(s)s| >= 1/N² at s = {s}"
                )));
            }
            if s >= 1.0 / self.l_width && s <= self.l_width && (a - self.alpha).abs() > 1e-14 {
                return Err(Error::ConvergenceFailure(format!(
                    "plateau eroded at s = {s}: a = {a}, alpha = {}",
                    self.alpha
                )));
            }
        }
        if let Some((lo, hi)) = self.support() {
            if self.eval(lo * 0.5) != 0.0 || self.eval(hi * 2.0) != 0.0 {
                return Err(Error::ConvergenceFailure(
                    "profile does not vanish off its support".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32) -> ProblemParams {
        ProblemParams::new(n).unwrap()
    }

    #[test]
    fn zero_plateau_is_zero_profile() {
        let a = make_profile_a(0.0, 2.0, params(2), None).unwrap();
        for s in [0.0, 0.3, 1.0, 5.0, 1e3] {
            assert_eq!(a.eval(s), 0.0);
            assert_eq!(a.deriv(s), 0.0);
        }
        assert!(a.support().is_none());
    }

    #[test]
    fn plateau_is_exact() {
        let a = make_profile_a(0.3, 2.0, params(2), None).unwrap();
        assert_eq!(a.eval(1.5), 0.3);
        assert_eq!(a.eval(0.5), 0.3);
        assert_eq!(a.eval(2.0), 0.3);
        // sup |a| equals the plateau value.
        let sup = (0..20000)
            .map(|i| a.eval((-12.0 + 24.0 * i as f64 / 19999.0).exp()))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((sup - 0.3).abs() < 1e-15, "sup = {sup}");
    }

    #[test]
    fn log_slope_strictly_below_bound() {
        let a = make_profile_a(0.3, 2.0, params(2), None).unwrap();
        let bound = 0.25; // 1/N² for N=2
        let max_slope = (0..40000)
            .map(|i| a.log_slope_abs((-12.0 + 24.0 * i as f64 / 39999.0).exp()))
            .fold(0.0f64, f64::max);
        assert!(max_slope < bound, "max |a'(s)s| = {max_slope}");
        // The raw trapezoid slope is tau = 1/8; smoothing cannot exceed it.
        assert!(max_slope <= 0.125 + 1e-15);
    }

    #[test]
    fn negative_plateau_and_evenness() {
        let a = make_profile_a(-0.4, 3.0, params(3), None).unwrap();
        assert_eq!(a.eval(2.0), -0.4);
        for s in [0.01, 0.7, 1.3, 8.0] {
            assert_eq!(a.eval(-s), a.eval(s));
            assert_eq!(a.deriv(-s), -a.deriv(s));
        }
        a.verify_properties(10_000).unwrap();
    }

    #[test]
    fn properties_hold_after_mollification() {
        for (alpha, l) in [(0.3, 2.0), (-0.3, 8.0), (0.5, 32.0), (-0.5, 2.0)] {
            let a = make_profile_a(alpha, l, params(2), None).unwrap();
            a.verify_properties(10_000).unwrap();
        }
    }

    #[test]
    fn oversized_mollification_rejected() {
        let max_eps = (3.0f64 / 2.0).ln();
        let err = make_profile_a(0.3, 2.0, params(2), Some(max_eps * 1.5));
        assert!(matches!(err, Err(Error::PlateauDestroyed { .. })));
    }

    #[test]
    fn out_of_range_plateau_rejected() {
        assert!(make_profile_a(0.7, 2.0, params(2), None).is_err());
        assert!(make_profile_a(0.1, 1.0, params(2), None).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let a = make_profile_a(0.3, 2.0, params(2), None).unwrap();
        let h = 1e-6;
        for s in [0.2, 0.35, 0.9, 2.4, 3.1, 6.0] {
            let fd = (a.eval(s + h) - a.eval(s - h)) / (2.0 * h);
            assert!(
                (a.deriv(s) - fd).abs() < 1e-7,
                "s = {s}: analytic {} vs fd {fd}",
                a.deriv(s)
            );
        }
    }
}
