//! Energy, action and identity residuals evaluated on radial functions.
//!
//! All quantities are quadratures over a [`RadialFunction`]'s grid:
//! the energy `𝓘(u) = ½‖∇u‖² - ∫G(u)`, the action `Ψ_μ = 𝓘 + μ·mass`,
//! the Lagrangian `I(λ,u) = Ψ_{e^λ}(u) - e^λ m`, the zero-mass functional
//! `Z_G` (same integral as `𝓘` read on the zero-mass space), the virial
//! quantity `Q(u) = ∫ g(u)u - 2G(u)`, and the rescaled functional
//! `K(a;λ,u)` of perturbed-power models. Pohozaev and Nehari residuals
//! are normalized by `‖∇u‖² + μ‖u‖² + 1` so pass/fail thresholds are
//! scale-free.

use crate::grid::{dilate_mass_preserving, RadialFunction};
use crate::nonlinearity::Nonlinearity;
use crate::{Error, Result};

/// Bundle of functional values at one `(u, λ, m)`.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalValues {
    /// Ψ_μ(u) with μ = e^λ.
    pub action_psi: f64,
    /// 𝓘(u).
    pub energy: f64,
    /// I(λ, u) = Ψ_μ(u) - μ m.
    pub lagrangian: f64,
    /// Z_G(u); numerically identical to the energy.
    pub zero_mass: f64,
    /// Q(u) = ∫ g(u)u - 2G(u).
    pub q_value: f64,
    /// K(a;λ,u) for perturbed-power models, `None` otherwise.
    pub k_value: Option<f64>,
    /// Normalized Pohozaev residual at multiplier μ.
    pub pohozaev_res: f64,
    /// Normalized Nehari residual `Ψ_μ'(u)u`.
    pub nehari_res: f64,
}

/// Quadrature of `f(u)` over the grid, guarding against overflow of the
/// nonlinearity at huge nodal values.
fn integrate_of(
    u: &RadialFunction,
    what: &str,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let grid = u.grid();
    let mut acc = 0.0;
    for ((&w, &v), &r) in grid
        .weights()
        .iter()
        .zip(u.values())
        .zip(grid.nodes())
    {
        let fv = f(v);
        if !fv.is_finite() {
            return Err(Error::NonFinite {
                what: format!("{what}({v})"),
                r,
            });
        }
        acc += w * fv;
    }
    Ok(acc)
}

/// Evaluate the functional bundle.
pub fn evaluate(
    nl: &Nonlinearity,
    u: &RadialFunction,
    lambda: f64,
    m: f64,
) -> Result<FunctionalValues> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("mass m = {m} must be positive")));
    }
    let mu = lambda.exp();
    let norms = u.norms();
    let g_int = integrate_of(u, "G", |s| nl.big_g(s))?;
    let gu_int = integrate_of(u, "g(u)u", |s| nl.g(s) * s)?;
    let energy = 0.5 * norms.grad2 - g_int;
    let action_psi = energy + mu * norms.mass;
    let lagrangian = action_psi - mu * m;
    let q_value = gu_int - 2.0 * g_int;
    let k_value = match nl.plateau_profile() {
        Some(profile) => {
            let p1 = nl.params().p_plus_one();
            let amp = mu.powf(nl.params().nf() / 4.0);
            let pert = integrate_of(u, "K integrand", |s| {
                (1.0 + profile.eval(amp * s)) * s.abs().powf(p1)
            })?;
            Some(0.5 * norms.grad2 + norms.mass - pert / p1)
        }
        None => None,
    };
    let nf = nl.params().nf();
    let denom = norms.grad2 + 2.0 * mu * norms.mass + 1.0;
    let pohozaev_res =
        ((nf - 2.0) / 2.0 * norms.grad2 - nf * (g_int - mu * norms.mass)) / denom;
    let nehari_res = (norms.grad2 + 2.0 * mu * norms.mass - gu_int) / denom;
    Ok(FunctionalValues {
        action_psi,
        energy,
        lagrangian,
        zero_mass: energy,
        q_value,
        k_value,
        pohozaev_res,
        nehari_res,
    })
}

/// Normalized Pohozaev residual of `-Δu + μu = g(u)`:
/// `[(N-2)/2 ‖∇u‖² - N (∫G(u) - μ·mass)] / (‖∇u‖² + μ‖u‖² + 1)`.
pub fn pohozaev_residual(nl: &Nonlinearity, u: &RadialFunction, mu: f64) -> Result<f64> {
    let norms = u.norms();
    let g_int = integrate_of(u, "G", |s| nl.big_g(s))?;
    let nf = nl.params().nf();
    let denom = norms.grad2 + 2.0 * mu * norms.mass + 1.0;
    Ok(((nf - 2.0) / 2.0 * norms.grad2 - nf * (g_int - mu * norms.mass)) / denom)
}

/// Zero-mass Pohozaev residual `[N Z_G(u) - ‖∇u‖²] / (‖∇u‖² + 1)`.
pub fn zero_mass_pohozaev_residual(nl: &Nonlinearity, u: &RadialFunction) -> Result<f64> {
    let norms = u.norms();
    let g_int = integrate_of(u, "G", |s| nl.big_g(s))?;
    let z = 0.5 * norms.grad2 - g_int;
    let nf = nl.params().nf();
    Ok((nf * z - norms.grad2) / (norms.grad2 + 1.0))
}

/// Normalized Nehari residual `Ψ_μ'(u)u / (‖∇u‖² + μ‖u‖² + 1)`.
pub fn nehari_residual(nl: &Nonlinearity, u: &RadialFunction, mu: f64) -> Result<f64> {
    let norms = u.norms();
    let gu_int = integrate_of(u, "g(u)u", |s| nl.g(s) * s)?;
    let denom = norms.grad2 + 2.0 * mu * norms.mass + 1.0;
    Ok((norms.grad2 + 2.0 * mu * norms.mass - gu_int) / denom)
}

/// Outcome of the Gagliardo-Nirenberg check
/// `½‖∇u‖² >= ‖u‖_{p+1}^{p+1}/(p+1)` for masses up to `m₁`.
#[derive(Debug, Clone, Copy)]
pub struct GnCheck {
    pub holds: bool,
    pub slack: f64,
    /// Set when `mass(u) > m₁`, where the inequality carries no content.
    pub vacuous: bool,
}

pub fn gn_check(u: &RadialFunction, m1: f64) -> GnCheck {
    let norms = u.norms();
    let p1 = u.grid().params().p_plus_one();
    let slack = 0.5 * norms.grad2 - norms.lp1 / p1;
    GnCheck {
        holds: slack >= -1e-12 * (1.0 + norms.grad2),
        slack,
        vacuous: norms.mass > m1 * (1.0 + 1e-12),
    }
}

/// `d/dt 𝓘(u_{0t})` along the mass-preserving dilation, N = 2 only:
/// `½ t^{-1} (‖∇u_{0t}‖² - Q(u_{0t}))`.
pub fn dt_energy_along_dilation(
    nl: &Nonlinearity,
    u: &RadialFunction,
    t: f64,
) -> Result<f64> {
    if nl.params().n_dim() != 2 {
        return Err(Error::InvalidInput(
            "dilation derivative requires N = 2".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let ut = dilate_mass_preserving(u, t)?;
    let norms = ut.norms();
    let g_int = integrate_of(&ut, "G", |s| nl.big_g(s))?;
    let gu_int = integrate_of(&ut, "g(u)u", |s| nl.g(s) * s)?;
    let q = gu_int - 2.0 * g_int;
    Ok(0.5 / t * (norms.grad2 - q))
}
