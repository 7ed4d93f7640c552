//! λ-scans of the mass-shifted level `b(λ) = a(e^λ) - e^λ m₁`, the
//! refined estimates `b̲ = inf_λ b(λ)` and `b̃ = sup_λ b(λ)`, and the
//! sign-case classification they support.
//!
//! `b̃` is a lower bracket for the two-dimensional minimax level, which
//! is never computed directly; every sign conclusion drawn here only
//! uses `b(λ) <= b̄`.

use rayon::prelude::*;

use crate::nonlinearity::Nonlinearity;
use crate::params::ProblemParams;
use crate::profile::make_profile_a;
use crate::shooting::{b_of_lambda_with, compute_m1, find_ground_state_with, FindOptions};
use crate::{Error, Result};

/// Sign case of `(b̲, b̃)` against the zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// b̲ < 0 < b̃
    I,
    /// b̲ = 0 < b̃
    II,
    /// b̲ < 0 = b̃
    III,
    /// b̲ = 0 = b̃
    IV,
}

impl CaseTag {
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::I => "i",
            CaseTag::II => "ii",
            CaseTag::III => "iii",
            CaseTag::IV => "iv",
        }
    }
}

/// One λ-sample of the scan.
#[derive(Debug, Clone, Copy)]
pub struct LevelSample {
    pub lambda: f64,
    pub mu: f64,
    pub b: f64,
    pub a: f64,
    /// Worst of the Pohozaev/Nehari residuals of the solve behind `a`.
    pub action_residual: f64,
}

/// Tabulated `b(λ)` with refined extrema and case classification.
#[derive(Debug, Clone)]
pub struct LevelScan {
    pub samples: Vec<LevelSample>,
    pub b_lower: f64,
    pub b_tilde: f64,
    pub case_tag: CaseTag,
    /// Half-width of the zero band used for the classification.
    pub zero_band: f64,
    /// λ values where no ground state was found (excluded samples).
    pub excluded: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub find: FindOptions,
    /// Zero band as a fraction of m₁.
    pub zero_band_frac: f64,
    /// Target λ-resolution of the extrema refinement.
    pub refine_dlambda: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            find: FindOptions::default(),
            zero_band_frac: 1e-3,
            refine_dlambda: 1e-3,
        }
    }
}

pub fn scan_b(
    nl: &Nonlinearity,
    m: f64,
    lambda_range: (f64, f64),
    n_samples: usize,
) -> Result<LevelScan> {
    scan_b_with(nl, m, lambda_range, n_samples, &ScanOptions::default())
}

pub fn scan_b_with(
    nl: &Nonlinearity,
    m: f64,
    lambda_range: (f64, f64),
    n_samples: usize,
    opts: &ScanOptions,
) -> Result<LevelScan> {
    let (lo, hi) = lambda_range;
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("bad lambda range [{lo}, {hi}]")));
    }
    if n_samples < 25 {
        return Err(Error::InvalidInput(format!(
            "n_samples = {n_samples} too small; need >= 25"
        )));
    }
    let lambdas: Vec<f64> = (0..n_samples)
        .map(|i| lo + (hi - lo) * i as f64 / (n_samples - 1) as f64)
        .collect();
    let results: Vec<(f64, Result<LevelSample>)> = lambdas
        .par_iter()
        .map(|&lambda| (lambda, sample_level(nl, lambda, m, &opts.find)))
        .collect();
    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for (lambda, res) in results {
        match res {
            Ok(s) => samples.push(s),
            Err(Error::NoSolution { .. }) => excluded.push(lambda),
            Err(e) => return Err(e),
        }
    }
    if samples.is_empty() {
        return Err(Error::NoSolution {
            mu: lo.exp(),
            s_min: 0.0,
            s_max: 0.0,
        });
    }

    // Golden-section refinement around the discrete extrema.
    let min_idx = argext(&samples, |s| s.b, true);
    let max_idx = argext(&samples, |s| s.b, false);
    let b_lower = refine_extremum(nl, m, &samples, min_idx, true, opts)?;
    let b_tilde = refine_extremum(nl, m, &samples, max_idx, false, opts)?;

    let m1 = compute_m1(nl.params())?;
    let zero_band = opts.zero_band_frac * m1;
    let low_neg = b_lower < -zero_band;
    let high_pos = b_tilde > zero_band;
    let case_tag = match (low_neg, high_pos) {
        (true, true) => CaseTag::I,
        (false, true) => CaseTag::II,
        (true, false) => CaseTag::III,
        (false, false) => CaseTag::IV,
    };
    Ok(LevelScan {
        samples,
        b_lower,
        b_tilde,
        case_tag,
        zero_band,
        excluded,
    })
}

fn sample_level(
    nl: &Nonlinearity,
    lambda: f64,
    m: f64,
    find: &FindOptions,
) -> Result<LevelSample> {
    let mu = lambda.exp();
    let gs = find_ground_state_with(nl, mu, find)?;
    Ok(LevelSample {
        lambda,
        mu,
        b: gs.action - mu * m,
        a: gs.action,
        action_residual: gs.pohozaev_res.abs().max(gs.nehari_res.abs()),
    })
}

fn argext(samples: &[LevelSample], f: impl Fn(&LevelSample) -> f64, min: bool) -> usize {
    let mut idx = 0;
    for (i, s) in samples.iter().enumerate() {
        let better = if min {
            f(s) < f(&samples[idx])
        } else {
            f(s) > f(&samples[idx])
        };
        if better {
            idx = i;
        }
    }
    idx
}

fn refine_extremum(
    nl: &Nonlinearity,
    m: f64,
    samples: &[LevelSample],
    idx: usize,
    min: bool,
    opts: &ScanOptions,
) -> Result<f64> {
    let mut best = samples[idx].b;
    let lo = samples[idx.saturating_sub(1)].lambda;
    let hi = samples[(idx + 1).min(samples.len() - 1)].lambda;
    if hi <= lo {
        return Ok(best);
    }
    let phi = 0.618_033_988_749_894_9;
    let sign = if min { 1.0 } else { -1.0 };
    let eval = |lambda: f64| -> Result<f64> {
        match b_of_lambda_with(nl, lambda, m, &opts.find) {
            Ok(b) => Ok(sign * b),
            Err(Error::NoSolution { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > opts.refine_dlambda {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2)?;
        }
        let cand = sign * f1.min(f2);
        if (min && cand < best) || (!min && cand > best) {
            best = cand;
        }
    }
    Ok(best)
}

/// Mountain-pass value of the rescaled functional:
/// `β(a;λ) = b(λ)/e^λ + m₁ = a(e^λ)/e^λ`. Perturbed-power models only.
pub fn beta_of(nl: &Nonlinearity, lambda: f64) -> Result<f64> {
    beta_of_with(nl, lambda, &FindOptions::default())
}

pub fn beta_of_with(nl: &Nonlinearity, lambda: f64, find: &FindOptions) -> Result<f64> {
    if nl.plateau_profile().is_none() {
        return Err(Error::InvalidInput(
            "beta is defined for perturbed-power models".into(),
        ));
    }
    let m1 = compute_m1(nl.params())?;
    let mu = lambda.exp();
    let b = b_of_lambda_with(nl, lambda, m1, find)?;
    Ok(b / mu + m1)
}

/// One row of the plateau-width experiment.
#[derive(Debug, Clone, Copy)]
pub struct LepsRow {
    pub l_width: f64,
    pub beta: f64,
    /// `|β(a;0) - (1+α)^{-2/(p-1)} m₁|`.
    pub deviation: f64,
}

/// Deviation of `β(a;0)` from the exact plateau level as the plateau
/// width grows. The deviation must shrink with L.
pub fn leps_experiment(
    alpha: f64,
    l_list: &[f64],
    params: ProblemParams,
) -> Result<Vec<LepsRow>> {
    leps_experiment_with(alpha, l_list, params, &FindOptions::default())
}

pub fn leps_experiment_with(
    alpha: f64,
    l_list: &[f64],
    params: ProblemParams,
    find: &FindOptions,
) -> Result<Vec<LepsRow>> {
    if l_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("L list must be increasing".into()));
    }
    let m1 = compute_m1(params)?;
    let target = (1.0 + alpha).powf(-params.two_over_p_minus_one()) * m1;
    l_list
        .iter()
        .map(|&l| {
            let profile = make_profile_a(alpha, l, params, None)?;
            let nl = Nonlinearity::perturbed_power(params, profile);
            let beta = beta_of_with(&nl, 0.0, find)?;
            Ok(LepsRow {
                l_width: l,
                beta,
                deviation: (beta - target).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::FindOptions;

    fn fast_scan() -> ScanOptions {
        ScanOptions {
            find: FindOptions {
                grid_n: 1024,
                ..FindOptions::default()
            },
            ..ScanOptions::default()
        }
    }

    #[test]
    fn power_case_classifies_as_iv() {
        let pp = ProblemParams::new(2).unwrap();
        let nl = Nonlinearity::power(pp);
        let m1 = compute_m1(pp).unwrap();
        let scan = scan_b_with(&nl, m1, (-4.0, 4.0), 25, &fast_scan()).unwrap();
        assert_eq!(scan.case_tag, CaseTag::IV, "b in [{}, {}]", scan.b_lower, scan.b_tilde);
        assert!(scan.excluded.is_empty());
        for s in &scan.samples {
            assert!(s.b.abs() <= 1e-3 * s.mu * m1, "lambda={}: b={}", s.lambda, s.b);
        }
    }

    #[test]
    fn beta_requires_perturbed_power() {
        let pp = ProblemParams::new(2).unwrap();
        let nl = Nonlinearity::power(pp);
        assert!(beta_of(&nl, 0.0).is_err());
    }

    #[test]
    fn beta_identity_against_b() {
        // b reconstructed from beta matches b_of_lambda to rounding.
        let pp = ProblemParams::new(2).unwrap();
        let a = make_profile_a(0.3, 2.0, pp, None).unwrap();
        let nl = Nonlinearity::perturbed_power(pp, a);
        let m1 = compute_m1(pp).unwrap();
        let find = FindOptions {
            grid_n: 1024,
            ..FindOptions::default()
        };
        let lambda = 0.4f64;
        let mu = lambda.exp();
        let beta = beta_of_with(&nl, lambda, &find).unwrap();
        let b = crate::shooting::b_of_lambda_with(&nl, lambda, m1, &find).unwrap();
        assert!(
            (mu * (beta - m1) - b).abs() <= 1e-10 * (1.0 + b.abs()),
            "mu(beta - m1) = {} vs b = {b}",
            mu * (beta - m1)
        );
    }

    #[test]
    fn scan_rejects_bad_input() {
        let pp = ProblemParams::new(2).unwrap();
        let nl = Nonlinearity::power(pp);
        assert!(scan_b(&nl, 1.0, (2.0, -2.0), 30).is_err());
        assert!(scan_b(&nl, 1.0, (-4.0, 4.0), 10).is_err());
    }
}
