//! Evaluable nonlinearity models.
//!
//! Every model exposes `g(s)`, its primitive `G(s)`, the deviations from
//! the pure power `h = g - |s|^{p-1}s`, `H = G - |s|^{p+1}/(p+1)`, and the
//! perturbation profile `ρ(s) = H(s)/(s²/2)`. All evaluators use the odd
//! extension of `g` (even `G`), so only `s >= 0` matters structurally.

use std::sync::Arc;

use crate::interp::Pchip;
use crate::params::ProblemParams;
use crate::profile::ProfileA;
use crate::{Error, Result};

/// Smooth bump `exp(1/(((t-c)/w)² - 1))` supported on `(c-w, c+w)`.
fn bump(t: f64, c: f64, w: f64) -> f64 {
    let x = (t - c) / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (x * x - 1.0)).exp()
    }
}

fn bump_deriv(t: f64, c: f64, w: f64) -> f64 {
    let x = (t - c) / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        let d = x * x - 1.0;
        (1.0 / d).exp() * (-2.0 * x / (d * d)) / w
    }
}

/// Quintic smoothstep: 0 below 0, 1 above 1, C² everywhere.
fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Plateau profile of a perturbed-power model: a sum of argument-scaled
/// profiles `Σ aᵢ(νᵢ s)`; the two-scale family uses `ν₂ = e^{-Nℓ/4}`.
#[derive(Debug, Clone)]
pub struct CombinedProfile {
    parts: Vec<(ProfileA, f64)>,
}

impl CombinedProfile {
    pub fn single(a: ProfileA) -> Self {
        Self {
            parts: vec![(a, 1.0)],
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.parts.iter().map(|(a, nu)| a.eval(nu * s)).sum()
    }

    pub fn deriv(&self, s: f64) -> f64 {
        self.parts
            .iter()
            .map(|(a, nu)| nu * a.deriv(nu * s))
            .sum()
    }
}

/// Even C¹ perturbation `Ξ` with `Ξ(0) = 0` and the X-norm
/// `sup_{0<|s|<=1} |Ξ'(s)|/|s|^p + sup_{|s|>=1} |Ξ'(s)|/|s|`.
#[derive(Clone)]
pub struct PerturbationXi {
    xi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    dxi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    p: f64,
    norm_x: f64,
}

impl std::fmt::Debug for PerturbationXi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbationXi")
            .field("norm_x", &self.norm_x)
            .finish()
    }
}

impl PerturbationXi {
    /// Wrap evaluators for `Ξ` and `Ξ'`. The norm is computed once on a
    /// dense log sample with local refinement and cached.
    pub fn from_fns(
        params: ProblemParams,
        xi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dxi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut out = Self {
            xi: Arc::new(xi),
            dxi: Arc::new(dxi),
            p: params.p(),
            norm_x: 0.0,
        };
        if (out.xi)(0.0) != 0.0 {
            return Err(Error::InvalidInput("Xi(0) != 0".into()));
        }
        out.norm_x = sample_x_norm(&out, 10_000);
        if !out.norm_x.is_finite() {
            return Err(Error::NonFinite {
                what: "X-norm of Xi".into(),
                r: 0.0,
            });
        }
        Ok(out)
    }

    /// `Ξ(s) = amp |s|^{p+1} B(s)` with a smooth bump `B` on (1, 3).
    pub fn power_bump(params: ProblemParams, amp: f64) -> Result<Self> {
        let p1 = params.p_plus_one();
        Self::from_fns(
            params,
            move |s: f64| amp * s.abs().powf(p1) * bump(s.abs(), 2.0, 1.0),
            move |s: f64| {
                let t = s.abs();
                s.signum() * amp * (p1 * t.powf(p1 - 1.0) * bump(t, 2.0, 1.0)
                    + t.powf(p1) * bump_deriv(t, 2.0, 1.0))
            },
        )
    }

    /// `Υ(s) = |s|^{2*} φ(s)`, the Sobolev-critical bump used by the
    /// zero-mass perturbation experiments (N >= 3). φ peaks at 1.9, so
    /// `φ'(2) < 0` while `φ' > 0` on (1.4, 1.9).
    pub fn sobolev_bump(params: ProblemParams) -> Result<Self> {
        let ts = params.two_star().ok_or_else(|| {
            Error::InvalidInput("sobolev bump needs N >= 3".into())
        })?;
        Self::from_fns(
            params,
            move |s: f64| s.abs().powf(ts) * bump(s.abs(), 1.9, 0.5),
            move |s: f64| {
                let t = s.abs();
                s.signum()
                    * (ts * t.powf(ts - 1.0) * bump(t, 1.9, 0.5)
                        + t.powf(ts) * bump_deriv(t, 1.9, 0.5))
            },
        )
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.xi)(s)
    }

    pub fn eval_deriv(&self, s: f64) -> f64 {
        (self.dxi)(s)
    }

    /// Cached `‖Ξ‖_X`.
    pub fn norm_x(&self) -> f64 {
        self.norm_x
    }

    /// `c·Ξ`.
    pub fn scaled(&self, c: f64) -> Self {
        let xi = self.xi.clone();
        let dxi = self.dxi.clone();
        Self {
            xi: Arc::new(move |s| c * xi(s)),
            dxi: Arc::new(move |s| c * dxi(s)),
            p: self.p,
            norm_x: c.abs() * self.norm_x,
        }
    }
}

/// The two suprema of the X-norm on a log-spaced sample with golden-ratio
/// refinement around the discrete maxima.
pub fn xi_norm(xi: &PerturbationXi) -> f64 {
    sample_x_norm(xi, 10_000)
}

fn sample_x_norm(xi: &PerturbationXi, n: usize) -> f64 {
    let p = xi.p;
    let inner = |s: f64| xi.eval_deriv(s).abs() / s.powf(p);
    let outer = |s: f64| xi.eval_deriv(s).abs() / s;
    let sup_inner = refined_log_sup(&inner, 1e-6, 1.0, n);
    let sup_outer = refined_log_sup(&outer, 1.0, 1e6, n);
    sup_inner + sup_outer
}

fn refined_log_sup(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut best = 0.0f64;
    let mut best_l = llo;
    for i in 0..=n {
        let l = llo + (lhi - llo) * i as f64 / n as f64;
        let v = f(l.exp());
        if v > best {
            best = v;
            best_l = l;
        }
    }
    // Golden-section polish inside the bracketing cell.
    let h = (lhi - llo) / n as f64;
    let (mut a, mut b) = ((best_l - h).max(llo), (best_l + h).min(lhi));
    let phi = 0.618_033_988_749_894_9;
    for _ in 0..60 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if f(x1.exp()) > f(x2.exp()) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.max(f(((a + b) / 2.0).exp()))
}

/// Closed-form data for the zero-mass example of dimension N >= 3:
/// `G₁ = |s|^{2*} F₁(|s|)` where `F₁' = base'·η` has a flat spot around
/// s = 2 and matches the pure-power `base = s^{p+1-2*}/(p+1)` outside
/// (1, 3). The field `f1_mid` tabulates `F₁ - base` on [1, 3].
#[derive(Debug, Clone)]
struct ZeroMassData {
    two_star: f64,
    /// Weight of the compensating side bump in η.
    comp: f64,
    f1_mid: Pchip,
    eps: f64,
}

const ZM_FLAT_LO: f64 = 1.7;
const ZM_FLAT_HI: f64 = 2.3;

impl ZeroMassData {
    fn chi(s: f64) -> f64 {
        // 0 -> 1 on [1.1, 1.7], 1 on [1.7, 2.3], 1 -> 0 on [2.3, 2.9].
        smoothstep((s - 1.1) / (ZM_FLAT_LO - 1.1))
            * (1.0 - smoothstep((s - ZM_FLAT_HI) / (2.9 - ZM_FLAT_HI)))
    }

    fn chi_side(s: f64) -> f64 {
        bump(s, 1.3, 0.25)
    }

    fn base(&self, params: ProblemParams, t: f64) -> f64 {
        let e = params.p_plus_one() - self.two_star;
        t.powf(e) / params.p_plus_one()
    }

    fn base_deriv(&self, params: ProblemParams, t: f64) -> f64 {
        let e = params.p_plus_one() - self.two_star;
        e * t.powf(e - 1.0) / params.p_plus_one()
    }

    fn eta(&self, s: f64) -> f64 {
        1.0 - Self::chi(s) + self.comp * Self::chi_side(s)
    }

    /// `F₁'(t)` for t > 0.
    fn f1_deriv(&self, params: ProblemParams, t: f64) -> f64 {
        let d = self.base_deriv(params, t);
        if (1.0..3.0).contains(&t) {
            d * self.eta(t)
        } else {
            d
        }
    }

    /// `F₁(t)` for t > 0.
    fn f1(&self, params: ProblemParams, t: f64) -> f64 {
        let b = self.base(params, t);
        if (1.0..3.0).contains(&t) {
            b + self.f1_mid.eval(t)
        } else {
            b
        }
    }
}

fn build_zero_mass_data(params: ProblemParams, eps: f64) -> Result<ZeroMassData> {
    let two_star = params
        .two_star()
        .ok_or_else(|| Error::InvalidInput("zero-mass example branch needs N >= 3".into()))?;
    let mut data = ZeroMassData {
        two_star,
        comp: 0.0,
        f1_mid: Pchip::new(vec![0.0, 1.0], vec![0.0, 0.0]),
        eps,
    };
    // comp enforces ∫₁³ base'·η = base(3) - base(1), i.e. continuity at 3.
    let quad = |f: &dyn Fn(f64) -> f64| -> f64 {
        let n = 20_000usize;
        let h = 2.0 / n as f64;
        let mut acc = f(1.0) + f(3.0);
        for i in 1..n {
            let t = 1.0 + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        acc * h / 3.0
    };
    let num = quad(&|t| data.base_deriv(params, t) * ZeroMassData::chi(t));
    let den = quad(&|t| data.base_deriv(params, t) * ZeroMassData::chi_side(t));
    data.comp = num / den;
    // Cumulative (F₁ - base) on [1, 3] by fine Simpson.
    let m = 4000usize;
    let h = 2.0 / m as f64;
    let integrand =
        |t: f64| data.base_deriv(params, t) * (data.eta(t) - 1.0);
    let mut xs = Vec::with_capacity(m / 2 + 1);
    let mut ys = Vec::with_capacity(m / 2 + 1);
    xs.push(1.0);
    ys.push(0.0);
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 <= m {
        let t0 = 1.0 + i as f64 * h;
        acc += h / 3.0 * (integrand(t0) + 4.0 * integrand(t0 + h) + integrand(t0 + 2.0 * h));
        xs.push(t0 + 2.0 * h);
        ys.push(acc);
        i += 2;
    }
    data.f1_mid = Pchip::new(xs, ys);
    Ok(data)
}

/// The N = 2 zero-mass example: `G₁ = (1 - ϑ)G₀` with a normalized bump
/// `ϑ(2) = 1`, so `G₁(2) = 0`, plus the ε-perturbation `-ε Φ` with
/// `Φ' = sgn(s)·bump(|s|)` (so the added term in g is negative at 2).
#[derive(Debug, Clone)]
struct ZeroMassData2 {
    phi_cum: Pchip,
    eps: f64,
}

fn build_zero_mass_data2(eps: f64) -> ZeroMassData2 {
    let m = 4000usize;
    let h = 2.0 / m as f64;
    let mut xs = vec![1.0];
    let mut ys = vec![0.0];
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 <= m {
        let t0 = 1.0 + i as f64 * h;
        acc += h / 3.0
            * (bump(t0, 2.0, 1.0) + 4.0 * bump(t0 + h, 2.0, 1.0) + bump(t0 + 2.0 * h, 2.0, 1.0));
        xs.push(t0 + 2.0 * h);
        ys.push(acc);
        i += 2;
    }
    ZeroMassData2 {
        phi_cum: Pchip::new(xs, ys),
        eps,
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// `g = |s|^{p-1} s`.
    Power,
    /// `g = (1+α)|s|^{p-1} s`; the exact comparison model for plateau
    /// levels. Violates the linear bound at infinity by design.
    ScaledPower { factor: f64 },
    /// `H = a(s)|s|^{p+1}/(p+1)` for a plateau profile a.
    PerturbedPower { profile: CombinedProfile },
    /// `G = (1 + sign·ε B(s)) G₀` with a bump B on (1, 3).
    BumpFamily { sign: f64, eps: f64 },
    /// `ρ(s) = α s⁴/(1+s⁴)`: linear growth α at infinity.
    RhoFamily { alpha: f64 },
    /// Zero-mass example, N >= 3 branch.
    ZeroMassExample(ZeroMassData),
    /// Zero-mass example, N = 2 branch.
    ZeroMassExample2(ZeroMassData2),
    /// Monotone-cubic interpolation of tabulated (s, g) data, odd
    /// extension; G integrated once at construction.
    Tabulated { g: Pchip, big_g: Pchip, alpha: f64 },
    /// `G + ε Ξ` on top of a base model.
    Perturbed {
        base: Box<Nonlinearity>,
        xi: PerturbationXi,
        eps: f64,
    },
}

/// A nonlinearity model bound to problem parameters.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    params: ProblemParams,
    kind: Kind,
}

impl Nonlinearity {
    pub fn power(params: ProblemParams) -> Self {
        Self {
            params,
            kind: Kind::Power,
        }
    }

    pub fn scaled_power(params: ProblemParams, alpha: f64) -> Self {
        Self {
            params,
            kind: Kind::ScaledPower {
                factor: 1.0 + alpha,
            },
        }
    }

    pub fn perturbed_power(params: ProblemParams, profile: ProfileA) -> Self {
        Self {
            params,
            kind: Kind::PerturbedPower {
                profile: CombinedProfile::single(profile),
            },
        }
    }

    /// `G >= G₀` family (sign +1) or `G <= G₀` family (sign -1).
    pub fn bump_family(params: ProblemParams, above: bool, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!("bump size eps = {eps}")));
        }
        Ok(Self {
            params,
            kind: Kind::BumpFamily {
                sign: if above { 1.0 } else { -1.0 },
                eps,
            },
        })
    }

    pub fn rho_family(params: ProblemParams, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::InvalidInput(format!("rho family needs alpha != 0, got {alpha}")));
        }
        Ok(Self {
            params,
            kind: Kind::RhoFamily { alpha },
        })
    }

    /// Tabulated (s, g) samples, s >= 0 strictly increasing from 0.
    pub fn tabulated(params: ProblemParams, s: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if s.len() != g.len() || s.len() < 4 {
            return Err(Error::InvalidInput(
                "tabulated data needs >= 4 matching samples".into(),
            ));
        }
        if s[0] != 0.0 || g[0] != 0.0 {
            return Err(Error::InvalidInput(
                "tabulated data must start at (0, 0)".into(),
            ));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("tabulated s must be increasing".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "tabulated g".into(),
                r: 0.0,
            });
        }
        let gp = Pchip::new(s.clone(), g.clone());
        // Cumulative G on a refined mesh (adaptive enough for 1e-10 on
        // tabulated data already limited by interpolation).
        let refine = 8usize;
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        let mut acc = 0.0;
        for w in s.windows(2) {
            let h = (w[1] - w[0]) / (2 * refine) as f64;
            for k in 0..refine {
                let a = w[0] + 2.0 * k as f64 * h;
                acc += h / 3.0 * (gp.eval(a) + 4.0 * gp.eval(a + h) + gp.eval(a + 2.0 * h));
                xs.push(a + 2.0 * h);
                ys.push(acc);
            }
        }
        let big_g = Pchip::new(xs, ys);
        // Empirical (g1*) limit estimate over the last decade of data.
        let s_hi = *s.last().unwrap();
        let p = params.p();
        let alpha = {
            let t = s_hi * 0.9;
            (gp.eval(t) - t.powf(p)) / t
        };
        Ok(Self {
            params,
            kind: Kind::Tabulated {
                g: gp,
                big_g,
                alpha,
            },
        })
    }

    /// `G + ε Ξ` for an X-perturbation.
    pub fn perturb(base: Nonlinearity, xi: PerturbationXi, eps: f64) -> Self {
        let params = base.params;
        Self {
            params,
            kind: Kind::Perturbed {
                base: Box::new(base),
                xi,
                eps,
            },
        }
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    /// The (g1α) limit of `h(s)/s` at infinity.
    pub fn alpha(&self) -> f64 {
        match &self.kind {
            Kind::Power
            | Kind::PerturbedPower { .. }
            | Kind::BumpFamily { .. }
            | Kind::ZeroMassExample(_)
            | Kind::ZeroMassExample2(_) => 0.0,
            Kind::ScaledPower { .. } => 0.0,
            Kind::RhoFamily { alpha } => *alpha,
            Kind::Tabulated { alpha, .. } => *alpha,
            Kind::Perturbed { base, .. } => base.alpha(),
        }
    }

    /// Plateau profile when this is a perturbed-power model.
    pub fn plateau_profile(&self) -> Option<&CombinedProfile> {
        match &self.kind {
            Kind::PerturbedPower { profile } => Some(profile),
            _ => None,
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self.kind, Kind::Power)
    }

    /// `g₀(s) = |s|^{p-1} s`.
    pub fn g0(&self, s: f64) -> f64 {
        let p = self.params.p();
        s.abs().powf(p - 1.0) * s
    }

    /// `G₀(s) = |s|^{p+1}/(p+1)`.
    pub fn big_g0(&self, s: f64) -> f64 {
        let p1 = self.params.p_plus_one();
        s.abs().powf(p1) / p1
    }

    /// h(s) = g(s) - |s|^{p-1}s, evaluated analytically per model so no
    /// cancellation against the power part occurs at large s.
    pub fn h(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Power => 0.0,
            Kind::ScaledPower { factor } => (factor - 1.0) * self.g0(s),
            Kind::PerturbedPower { profile } => {
                profile.eval(s) * self.g0(s) + profile.deriv(s) * self.big_g0(s)
            }
            Kind::BumpFamily { sign, eps } => {
                let t = s.abs();
                if !(1.0..3.0).contains(&t) {
                    return 0.0;
                }
                sign * eps
                    * (bump(t, 2.0, 1.0) * self.g0(s)
                        + s.signum() * bump_deriv(t, 2.0, 1.0) * self.big_g0(s))
            }
            Kind::RhoFamily { alpha } => {
                let t = s.abs();
                let t4 = t.powi(4);
                let den = 1.0 + t4;
                s.signum() * alpha * t.powi(5) * (3.0 + t4) / (den * den)
            }
            Kind::ZeroMassExample(d) => {
                let t = s.abs();
                if !(1.0..3.0).contains(&t) {
                    return 0.0;
                }
                let ts = d.two_star;
                let f1 = d.f1(self.params, t);
                let df1 = d.f1_deriv(self.params, t);
                let mut g = ts * t.powf(ts - 1.0) * f1 + t.powf(ts) * df1;
                if d.eps > 0.0 {
                    g += d.eps
                        * (ts * t.powf(ts - 1.0) * bump(t, 1.9, 0.5)
                            + t.powf(ts) * bump_deriv(t, 1.9, 0.5));
                }
                s.signum() * g - self.g0(s)
            }
            Kind::ZeroMassExample2(d) => {
                let t = s.abs();
                if !(1.0..3.0).contains(&t) {
                    return 0.0;
                }
                let theta = std::f64::consts::E * bump(t, 2.0, 1.0);
                let dtheta = std::f64::consts::E * bump_deriv(t, 2.0, 1.0);
                -theta * self.g0(s)
                    - s.signum() * (dtheta * self.big_g0(s) + d.eps * bump(t, 2.0, 1.0))
            }
            Kind::Tabulated { g, .. } => s.signum() * g.eval(s.abs()) - self.g0(s),
            Kind::Perturbed { base, xi, eps } => base.h(s) + eps * xi.eval_deriv(s),
        }
    }

    /// H(s) = G(s) - |s|^{p+1}/(p+1), analytic per model.
    pub fn big_h(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Power => 0.0,
            Kind::ScaledPower { factor } => (factor - 1.0) * self.big_g0(s),
            Kind::PerturbedPower { profile } => profile.eval(s) * self.big_g0(s),
            Kind::BumpFamily { sign, eps } => {
                let t = s.abs();
                if !(1.0..3.0).contains(&t) {
                    return 0.0;
                }
                sign * eps * bump(t, 2.0, 1.0) * self.big_g0(s)
            }
            Kind::RhoFamily { alpha } => {
                let t = s.abs();
                alpha * t.powi(6) / (2.0 * (1.0 + t.powi(4)))
            }
            Kind::ZeroMassExample(d) => {
                let t = s.abs();
                if !(1.0..3.0).contains(&t) {
                    return 0.0;
                }
                // F₁ - base is tabulated directly, so H carries no
                // power-part cancellation.
                let mut v = t.powf(d.two_star) * d.f1_mid.eval(t);
                if d.eps > 0.0 {
                    v += d.eps * t.powf(d.two_star) * bump(t, 1.9, 0.5);
                }
                v
            }
            Kind::ZeroMassExample2(d) => {
                let t = s.abs();
                let mut v = 0.0;
                if (1.0..3.0).contains(&t) {
                    v -= std::f64::consts::E * bump(t, 2.0, 1.0) * self.big_g0(s);
                }
                if t > 1.0 {
                    v -= d.eps * d.phi_cum.eval(t.min(3.0));
                }
                v
            }
            Kind::Tabulated { big_g, .. } => big_g.eval(s.abs()) - self.big_g0(s),
            Kind::Perturbed { base, xi, eps } => base.big_h(s) + eps * xi.eval(s),
        }
    }

    /// g(s) = |s|^{p-1}s + h(s), odd.
    pub fn g(&self, s: f64) -> f64 {
        self.g0(s) + self.h(s)
    }

    /// G(s) = |s|^{p+1}/(p+1) + H(s), even.
    pub fn big_g(&self, s: f64) -> f64 {
        self.big_g0(s) + self.big_h(s)
    }

    /// ρ(s) = H(s)/(s²/2); 0 at s = 0.
    pub fn rho(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            self.big_h(s) / (0.5 * s * s)
        }
    }

    /// `sup |H(s)|/s²` over a dense log sample: the constant Ā in the
    /// level band `-2Ā m₁ <= b̲`.
    pub fn h_bound(&self) -> f64 {
        let n = 4000;
        (0..=n)
            .map(|i| {
                let s = (-14.0 + 28.0 * i as f64 / n as f64).exp();
                (self.big_h(s) / (s * s)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Two-scale profile sum `a_ℓ = a₁ + a₂(e^{-Nℓ/4}·)` as a perturbed-power
/// model. Rejects shifts that leave the supports overlapping, reporting
/// the smallest admissible `ℓ`.
pub fn make_two_scale(
    a1: ProfileA,
    a2: ProfileA,
    ell: f64,
    params: ProblemParams,
) -> Result<Nonlinearity> {
    if ell < 0.0 || !ell.is_finite() {
        return Err(Error::InvalidInput(format!("shift ell = {ell}")));
    }
    let nu = (-params.nf() * ell / 4.0).exp();
    let (s1_hi, s2_lo) = match (a1.support(), a2.support()) {
        (None, None) => return Ok(Nonlinearity::power(params)),
        (Some(_), None) => {
            return Ok(Nonlinearity::perturbed_power(params, a1));
        }
        (None, Some(_)) => {
            return Ok(Nonlinearity {
                params,
                kind: Kind::PerturbedPower {
                    profile: CombinedProfile {
                        parts: vec![(a2, nu)],
                    },
                },
            });
        }
        (Some((_, hi1)), Some((lo2, _))) => (hi1, lo2),
    };
    // Second support sits at e^{Nℓ/4}·supp a₂; disjoint iff it starts
    // above the first support's upper edge.
    let min_ell = 4.0 / params.nf() * (s1_hi / s2_lo).ln();
    if s2_lo / nu <= s1_hi {
        return Err(Error::OverlappingSupports { min_ell });
    }
    // Sampled double-check of disjointness.
    let n = 2000;
    for i in 0..=n {
        let s = (s1_hi.ln() * (n - i) as f64 / n as f64
            + (s2_lo / nu).ln() * i as f64 / n as f64)
            .exp();
        if a1.eval(s) != 0.0 && a2.eval(nu * s) != 0.0 {
            return Err(Error::OverlappingSupports { min_ell });
        }
    }
    Ok(Nonlinearity {
        params,
        kind: Kind::PerturbedPower {
            profile: CombinedProfile {
                parts: vec![(a1, 1.0), (a2, nu)],
            },
        },
    })
}

/// Zero-mass example generator. For N >= 3 this is the `F₁' <= 0` model
/// with a flat spot at s = 2 plus the Sobolev bump `ε|s|^{2*}φ(s)`; for
/// N = 2 it is `G₁ = (1-ϑ)G₀` with `G₁(2) = 0` minus an ε-bump in g.
pub fn make_g2_example(params: ProblemParams, eps: f64) -> Result<Nonlinearity> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps = {eps} must be >= 0")));
    }
    if params.n_dim() == 2 {
        return Ok(Nonlinearity {
            params,
            kind: Kind::ZeroMassExample2(build_zero_mass_data2(eps)),
        });
    }
    let data = build_zero_mass_data(params, eps)?;
    Ok(Nonlinearity {
        params,
        kind: Kind::ZeroMassExample(data),
    })
}

/// d/ds [ G(s)/s^{2*} ] — the (g3)/(g2) criterion function for N >= 3.
pub fn sobolev_quotient_deriv(nl: &Nonlinearity, s: f64) -> Option<f64> {
    let ts = nl.params().two_star()?;
    if s <= 0.0 {
        return None;
    }
    // (G/s^{2*})' = (g s - 2* G)/s^{2*+1}
    Some((nl.g(s) * s - ts * nl.big_g(s)) / s.powf(ts + 1.0))
}

/// Verdict for one structural condition: whether it held on the sample,
/// the worst margin seen, and a witness point if violated.
#[derive(Debug, Clone, Copy)]
pub struct ConditionVerdict {
    pub holds: bool,
    pub margin: f64,
    pub witness: Option<f64>,
}

impl ConditionVerdict {
    fn from_min(min: f64, at: f64, tol: f64) -> Self {
        Self {
            holds: min >= -tol,
            margin: min,
            witness: if min >= -tol { None } else { Some(at) },
        }
    }
}

/// Sampled certification report for the structural conditions.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Ambrosetti-Rabinowitz: `g(s)s >= (p+3)/2 G(s)`; margin normalized
    /// by `|s|^{p+1}`.
    pub ar: ConditionVerdict,
    /// (g3): `G(s) >= (N-2)/(2N) g(s)s`; margin normalized by `|s|^{p+1}`.
    pub g3: ConditionVerdict,
    /// (ρ+1): `ρ(s) < α` strictly off zero.
    pub rho_below_alpha: ConditionVerdict,
    /// (ρ-1)(i): ρ non-increasing on (0, ∞).
    pub rho_nonincreasing: ConditionVerdict,
    /// (g1*) at zero: `h(s)/|s|^{p-1}s -> 0`.
    pub limit_zero: ConditionVerdict,
    /// (g1*) at infinity: `h(s)/s -> α`.
    pub limit_infinity: ConditionVerdict,
}

/// Evaluate the condition battery on a log-spaced sample of `[1e-6, 1e6]`
/// (default 10⁴ points) with local refinement around sign changes.
pub fn check_conditions(nl: &Nonlinearity, n_sample: usize) -> ConditionReport {
    let n = n_sample.max(100);
    let p1 = nl.params().p_plus_one();
    let p = nl.params().p();
    let nf = nl.params().nf();
    let alpha = nl.alpha();
    let ar_coeff = (p + 3.0) / 2.0;
    let g3_coeff = (nf - 2.0) / (2.0 * nf);

    let ln10 = std::f64::consts::LN_10;
    let sample: Vec<f64> = (0..=n)
        .map(|i| (-6.0 * ln10 + 12.0 * ln10 * i as f64 / n as f64).exp())
        .collect();

    let ar_fn = |s: f64| (nl.g(s) * s - ar_coeff * nl.big_g(s)) / s.abs().powf(p1);
    let g3_fn = |s: f64| (nl.big_g(s) - g3_coeff * nl.g(s) * s) / s.abs().powf(p1);
    let (ar_min, ar_at) = refined_min(&ar_fn, &sample);
    let (g3_min, g3_at) = refined_min(&g3_fn, &sample);

    // (ρ+1): α > 0 and ρ(s) < α off zero. The gap closes to rounding
    // level as ρ approaches its limit, so "strictly below" is certified
    // up to machine precision.
    let rho_gap = |s: f64| alpha - nl.rho(s);
    let (rho_min, rho_at) = refined_min(&rho_gap, &sample);
    let rho_ok = alpha > 0.0 && rho_min >= -1e-13 * alpha && nl.rho(1.0) < alpha;
    let rho_below_alpha = ConditionVerdict {
        holds: rho_ok,
        margin: rho_min,
        witness: if rho_ok { None } else { Some(rho_at) },
    };

    // Monotonicity of ρ on the sample.
    let mut mono_min = f64::INFINITY;
    let mut mono_at = None;
    for w in sample.windows(2) {
        let d = nl.rho(w[0]) - nl.rho(w[1]);
        if d < mono_min {
            mono_min = d;
            mono_at = Some(w[1]);
        }
    }
    let rho_nonincreasing = ConditionVerdict {
        holds: mono_min >= -1e-12,
        margin: mono_min,
        witness: if mono_min >= -1e-12 { None } else { mono_at },
    };

    // Empirical limits: ratio within tol over the last two decades with a
    // monotone trend toward the limit.
    let tol = 1e-3;
    let limit_zero = empirical_limit(
        |s| nl.h(s) / (s.abs().powf(p - 1.0) * s),
        0.0,
        &[1e-5, 1e-6],
        tol,
    );
    let limit_infinity = empirical_limit(|s| nl.h(s) / s, alpha, &[1e5, 1e6], tol.max(1e-3 * alpha.abs()));

    ConditionReport {
        ar: ConditionVerdict::from_min(ar_min, ar_at, 1e-12),
        g3: ConditionVerdict::from_min(g3_min, g3_at, 1e-12),
        rho_below_alpha,
        rho_nonincreasing,
        limit_zero,
        limit_infinity,
    }
}

fn refined_min(f: &dyn Fn(f64) -> f64, sample: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut at = sample[0];
    for &s in sample {
        let v = f(s);
        if v < min {
            min = v;
            at = s;
        }
    }
    // Local refinement around the discrete minimum.
    let i = sample.iter().position(|&s| s == at).unwrap();
    let lo = if i == 0 { sample[0] } else { sample[i - 1] };
    let hi = if i + 1 == sample.len() {
        sample[i]
    } else {
        sample[i + 1]
    };
    for k in 0..=200 {
        let s = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 200.0).exp();
        let v = f(s);
        if v < min {
            min = v;
            at = s;
        }
    }
    (min, at)
}

fn empirical_limit(
    f: impl Fn(f64) -> f64,
    target: f64,
    probes: &[f64],
    tol: f64,
) -> ConditionVerdict {
    let devs: Vec<f64> = probes.iter().map(|&s| (f(s) - target).abs()).collect();
    let within = devs.iter().all(|&d| d <= tol);
    let trending = devs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    ConditionVerdict {
        holds: within && trending,
        margin: tol - worst,
        witness: if within && trending {
            None
        } else {
            Some(probes[devs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0)])
        },
    }
}
