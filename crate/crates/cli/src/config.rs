//! Scenario configuration: flat key-value TOML with one section per
//! concern. Every field has a default, so an empty file is a valid
//! scenario; `validate` echoes the effective configuration and returns
//! static diagnostics without running any numerics.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

use nls_core::{
    make_g2_example, make_profile_a, make_two_scale, Nonlinearity, ProblemParams,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Problem {
    /// Dimension N >= 2.
    pub n_dim: u32,
    /// Interval count of the radial grid.
    pub grid_n: usize,
    /// Truncation radius; 0 selects the confinement default 30/sqrt(mu).
    pub rmax: f64,
    /// Grading exponent; 0 selects the default (first node near rmax/4n).
    pub stretch: f64,
}

impl Default for Problem {
    fn default() -> Self {
        Self {
            n_dim: 2,
            grid_n: 4096,
            rmax: 0.0,
            stretch: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearitySpec {
    /// power | scaled-power | plateau | two-scale | bump-above |
    /// bump-below | rho | zero-mass-example | tabulated
    pub kind: String,
    /// Plateau value / rho limit / scaled-power offset.
    pub alpha: f64,
    /// Plateau width L > 1.
    pub l_width: f64,
    /// Second plateau value of the two-scale profile.
    pub alpha2: f64,
    /// Two-scale shift.
    pub ell: f64,
    /// Bump size / zero-mass example perturbation.
    pub eps: f64,
    /// Mollification radius in log s; 0 selects the default.
    pub mollify_eps: f64,
    /// CSV file "s,g" for the tabulated kind.
    pub table: String,
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        Self {
            kind: "power".into(),
            alpha: 0.3,
            l_width: 4.0,
            alpha2: 0.3,
            ell: 18.0,
            eps: 0.2,
            mollify_eps: 0.0,
            table: String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    /// Frequency for ground-state runs.
    pub mu: f64,
    /// Constraint mass; 0 selects the critical mass m1.
    pub mass: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_samples: usize,
    /// Zero-mass scan heights.
    pub heights: usize,
    pub height_min: f64,
    pub height_max: f64,
    /// Level cap of the zero-mass verdict; 0 selects b_tilde + 20%.
    pub beta_cap: f64,
    /// Decreasing perturbation sizes of the stability experiment.
    pub eps_list: Vec<f64>,
    /// Zero-mass exponent q; 0 selects p.
    pub q: f64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            mu: 1.0,
            mass: 0.0,
            lambda_min: -4.0,
            lambda_max: 4.0,
            n_samples: 25,
            heights: 40,
            height_min: 1e-3,
            height_max: 1e3,
            beta_cap: 0.0,
            eps_list: vec![0.3, 0.1, 0.03],
            q: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flow {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub rmax: f64,
    pub record_every: usize,
}

impl Default for Flow {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            grad_tol: 1e-8,
            rmax: 30.0,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub problem: Problem,
    pub nonlinearity: NonlinearitySpec,
    pub experiment: Experiment,
    pub flow: Flow,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let scenario: Scenario = toml::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        Ok(scenario)
    }

    /// Apply the --refine flag: doubled grid resolution and sampling.
    pub fn refined(mut self) -> Self {
        self.problem.grid_n *= 2;
        self.experiment.n_samples *= 2;
        self.experiment.heights *= 2;
        self
    }

    pub fn params(&self) -> Result<ProblemParams> {
        Ok(ProblemParams::new(self.problem.n_dim)?)
    }

    /// Build the nonlinearity model described by the spec section.
    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let params = self.params()?;
        let nl = &self.nonlinearity;
        let mollify = if nl.mollify_eps > 0.0 {
            Some(nl.mollify_eps)
        } else {
            None
        };
        Ok(match nl.kind.as_str() {
            "power" => Nonlinearity::power(params),
            "scaled-power" => Nonlinearity::scaled_power(params, nl.alpha),
            "plateau" => {
                let a = make_profile_a(nl.alpha, nl.l_width, params, mollify)?;
                Nonlinearity::perturbed_power(params, a)
            }
            "two-scale" => {
                let a1 = make_profile_a(nl.alpha, nl.l_width, params, mollify)?;
                let a2 = make_profile_a(nl.alpha2, nl.l_width, params, mollify)?;
                make_two_scale(a1, a2, nl.ell, params)?
            }
            "bump-above" => Nonlinearity::bump_family(params, true, nl.eps)?,
            "bump-below" => Nonlinearity::bump_family(params, false, nl.eps)?,
            "rho" => Nonlinearity::rho_family(params, nl.alpha)?,
            "zero-mass-example" => make_g2_example(params, nl.eps)?,
            "tabulated" => {
                let (s, g) = read_table(Path::new(&nl.table))?;
                Nonlinearity::tabulated(params, s, g)?
            }
            other => anyhow::bail!("unknown nonlinearity kind '{other}'"),
        })
    }

    /// Static checks; diagnostics are returned, never thrown.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.problem.n_dim < 2 {
            out.push(format!(
                "problem.n_dim = {} rejected: the problem is posed for N >= 2",
                self.problem.n_dim
            ));
        }
        if self.problem.grid_n < 64 {
            out.push(format!(
                "problem.grid_n = {} too small; composite quadrature needs >= 64 intervals",
                self.problem.grid_n
            ));
        }
        if self.problem.rmax < 0.0 || !self.problem.rmax.is_finite() {
            out.push(format!("problem.rmax = {} invalid", self.problem.rmax));
        }
        if self.problem.stretch != 0.0 && self.problem.stretch < 1.0 {
            out.push(format!(
                "problem.stretch = {} would coarsen the origin; use >= 1 or 0 for auto",
                self.problem.stretch
            ));
        }
        let kind = self.nonlinearity.kind.as_str();
        if matches!(kind, "plateau" | "two-scale") && self.nonlinearity.alpha.abs() > 0.5 {
            out.push(format!(
                "nonlinearity.alpha = {} outside the plateau bound [-1/2, 1/2] (eq_propr_a_1)",
                self.nonlinearity.alpha
            ));
        }
        if kind == "two-scale" && self.nonlinearity.alpha2.abs() > 0.5 {
            out.push(format!(
                "nonlinearity.alpha2 = {} outside the plateau bound [-1/2, 1/2] (eq_propr_a_1)",
                self.nonlinearity.alpha2
            ));
        }
        if matches!(kind, "plateau" | "two-scale") && self.nonlinearity.l_width <= 1.0 {
            out.push(format!(
                "nonlinearity.l_width = {} must exceed 1 (eq_propr_a_4)",
                self.nonlinearity.l_width
            ));
        }
        if kind == "zero-mass-example" && self.problem.n_dim == 2 && self.nonlinearity.eps > 0.1
        {
            out.push(
                "nonlinearity.eps large for the N = 2 zero-mass example; the perturbed g dips \
                 far below zero near s = 2"
                    .into(),
            );
        }
        if self.experiment.lambda_max <= self.experiment.lambda_min {
            out.push(format!(
                "experiment lambda range [{}, {}] is empty",
                self.experiment.lambda_min, self.experiment.lambda_max
            ));
        }
        if self.experiment.n_samples < 25 {
            out.push(format!(
                "experiment.n_samples = {} below the scan minimum of 25",
                self.experiment.n_samples
            ));
        }
        if (self.experiment.height_max / self.experiment.height_min).log10() < 6.0 {
            out.push(format!(
                "zero-mass height window [{:.1e}, {:.1e}] spans fewer than 6 decades",
                self.experiment.height_min, self.experiment.height_max
            ));
        }
        if self
            .experiment
            .eps_list
            .windows(2)
            .any(|w| w[1] >= w[0])
        {
            out.push("experiment.eps_list must be strictly decreasing".into());
        }
        if self.flow.grad_tol <= 0.0 || self.flow.grad_tol >= 1e-2 {
            out.push(format!(
                "flow.grad_tol = {} outside the sensible ordering 0 < tol < 1e-2",
                self.flow.grad_tol
            ));
        }
        if self.experiment.mass < 0.0 {
            out.push(format!("experiment.mass = {} negative", self.experiment.mass));
        }
        if self.experiment.mu <= 0.0 {
            out.push(format!("experiment.mu = {} must be positive", self.experiment.mu));
        }
        out
    }

    /// Effective configuration as TOML (the `validate` echo).
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading table {}", path.display()))?;
    let mut s = Vec::new();
    let mut g = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("s")) {
            continue;
        }
        let mut parts = line.split(',');
        let sv: f64 = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .with_context(|| format!("table line {}: bad s value", i + 1))?;
        let gv: f64 = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .with_context(|| format!("table line {}: bad g value", i + 1))?;
        s.push(sv);
        g.push(gv);
    }
    Ok((s, g))
}
