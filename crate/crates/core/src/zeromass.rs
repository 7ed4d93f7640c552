//! Zero-mass problem `-Δu = g(u)` on the gradient-plus-L^{q+1} space:
//! height scans for positive decaying solutions, the level-capped
//! non-existence verdict, pointwise decay-bound checks, and the
//! perturbation-stability experiment.
//!
//! Verdicts are numerical evidence, grid-limited by construction; a
//! `NoSolutionFound` never claims more than "no candidate survived the
//! scan and the Pohozaev filter".

use std::sync::Arc;

use rayon::prelude::*;

use crate::functionals::zero_mass_pohozaev_residual;
use crate::grid::{build_grid, default_stretch, RadialFunction};
use crate::nonlinearity::{Nonlinearity, PerturbationXi};
use crate::shooting::{dp45_step, StepControl};
use crate::{Error, Result};

/// Shot classification for the zero-mass equation. `Decays` requires an
/// algebraic-tail certificate (N >= 3); trajectories that reach the
/// domain end positive but uncertified are `Inconclusive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMassClass {
    CrossesZero(f64),
    Decays,
    Blows,
    Inconclusive,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroShot {
    pub s0: f64,
    pub class: ZeroMassClass,
    pub r_end: f64,
    pub u_end: f64,
    pub du_end: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroShootSettings {
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Domain end in units of the height scale `s0^{-(q-1)/2}`.
    pub domain_factor: f64,
    pub blow_factor: f64,
}

impl Default for ZeroShootSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_steps: 400_000,
            domain_factor: 300.0,
            blow_factor: 3.0,
        }
    }
}

/// Integrate `u'' + (N-1)/r u' + g(u) = 0` outward from height `s0`.
pub fn zero_mass_shoot(nl: &Nonlinearity, q: f64, s0: f64) -> ZeroShot {
    zero_mass_shoot_with(nl, q, s0, &ZeroShootSettings::default())
}

pub fn zero_mass_shoot_with(
    nl: &Nonlinearity,
    q: f64,
    s0: f64,
    settings: &ZeroShootSettings,
) -> ZeroShot {
    debug_assert!(s0 > 0.0);
    let nf = nl.params().nf();
    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], -nl.g(y[0]) - (nf - 1.0) / r * y[1]]
    };
    // Crossing radius scales like s0^{-(q-1)/2} for power-like g.
    let r_scale = s0.powf(-(q - 1.0) / 2.0);
    let rmax = settings.domain_factor * r_scale.max(1.0 / settings.domain_factor);
    let r0 = 1e-8 * rmax;
    let mut r = r0;
    let w0 = -nl.g(s0);
    let mut y = [s0 + w0 * r0 * r0 / (2.0 * nf), w0 * r0 / nf];
    let mut ctrl = StepControl {
        h: 1e-5 * rmax,
        scale: [s0, s0 / r_scale.max(1e-300)],
        rel_tol: settings.rel_tol,
    };
    let finish = |class: ZeroMassClass, r: f64, y: [f64; 2]| ZeroShot {
        s0,
        class,
        r_end: r,
        u_end: y[0],
        du_end: y[1],
    };
    let algebraic_rate = nf - 2.0;
    for _ in 0..settings.max_steps {
        if ctrl.h < 1e-16 * rmax {
            return finish(ZeroMassClass::Inconclusive, r, y);
        }
        let h = ctrl.h.min(rmax - r);
        let (y_new, err) = dp45_step(&rhs, r, y, h);
        {
            let save = ctrl.h;
            ctrl.h = h;
            if !ctrl.assess(err) {
                continue;
            }
            if h < save {
                ctrl.h = ctrl.h.max(save);
            }
        }
        let r_new = r + h;
        if !y_new[0].is_finite() {
            return finish(ZeroMassClass::Inconclusive, r, y);
        }
        if y_new[0] <= 0.0 {
            let frac = y[0] / (y[0] - y_new[0]);
            return finish(ZeroMassClass::CrossesZero(r + frac * h), r_new, y_new);
        }
        if y_new[1] > 0.0 && y_new[0] > 1e-10 * s0 {
            return finish(ZeroMassClass::Blows, r_new, y_new);
        }
        if y_new[0] > settings.blow_factor * s0 {
            return finish(ZeroMassClass::Blows, r_new, y_new);
        }
        // Algebraic decay certificate (N >= 3): logarithmic slope close
        // to -(N-2) at small amplitude.
        if nf >= 3.0 && y_new[0] < 1e-3 * s0 && r_new > 4.0 * r_scale {
            let slope = y_new[1] * r_new / y_new[0];
            if (slope + algebraic_rate).abs() < 0.2 * algebraic_rate {
                return finish(ZeroMassClass::Decays, r_new, y_new);
            }
        }
        r = r_new;
        y = y_new;
        if r >= rmax * (1.0 - 1e-12) {
            return finish(ZeroMassClass::Inconclusive, r, y);
        }
    }
    finish(ZeroMassClass::Inconclusive, r, y)
}

/// Non-existence verdict below the level cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMassVerdict {
    NoSolutionFound,
    /// A candidate passed the Pohozaev filter at this Z_G level.
    CandidateFound(f64),
}

/// A zero-mass solution candidate that survived the filters.
#[derive(Debug, Clone)]
pub struct ZeroMassCandidate {
    pub s0: f64,
    pub u: RadialFunction,
    pub z_value: f64,
    pub pohozaev_res: f64,
}

/// Outcome of one height scan.
#[derive(Debug, Clone)]
pub struct ZeroMassScan {
    pub q: f64,
    pub beta_cap: f64,
    pub outcomes: Vec<ZeroShot>,
    pub candidates: Vec<ZeroMassCandidate>,
    pub verdict: ZeroMassVerdict,
    pub inconclusive_fraction: f64,
    /// Set when more than 20% of the shots were inconclusive.
    pub unreliable: bool,
}

/// Scan the zero-mass problem over a height grid. The verdict is
/// `NoSolutionFound` iff no Pohozaev-certified candidate has
/// `Z_G <= beta_cap`.
pub fn g2_scan(
    nl: &Nonlinearity,
    q: f64,
    beta_cap: f64,
    height_grid: &[f64],
) -> Result<ZeroMassScan> {
    if height_grid.len() < 2 {
        return Err(Error::InvalidInput("height grid too small".into()));
    }
    let decades = (height_grid[height_grid.len() - 1] / height_grid[0]).log10();
    if decades < 6.0 - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "height grid spans {decades:.2} decades; need >= 6"
        )));
    }
    let outcomes: Vec<ZeroShot> = height_grid
        .par_iter()
        .map(|&s0| zero_mass_shoot(nl, q, s0))
        .collect();
    let inconclusive = outcomes
        .iter()
        .filter(|o| matches!(o.class, ZeroMassClass::Inconclusive))
        .count();
    let inconclusive_fraction = inconclusive as f64 / outcomes.len() as f64;

    let mut candidates = Vec::new();
    for shot in outcomes
        .iter()
        .filter(|o| matches!(o.class, ZeroMassClass::Decays))
    {
        if let Some(c) = build_candidate(nl, shot)? {
            candidates.push(c);
        }
    }
    let best = candidates
        .iter()
        .filter(|c| c.z_value <= beta_cap)
        .map(|c| c.z_value)
        .fold(f64::INFINITY, f64::min);
    let verdict = if best.is_finite() {
        ZeroMassVerdict::CandidateFound(best)
    } else {
        ZeroMassVerdict::NoSolutionFound
    };
    Ok(ZeroMassScan {
        q,
        beta_cap,
        outcomes,
        candidates,
        verdict,
        inconclusive_fraction,
        unreliable: inconclusive_fraction > 0.2,
    })
}

/// Re-integrate a decaying shot onto a grid, graft the algebraic tail,
/// and apply the Pohozaev and level filters.
fn build_candidate(nl: &Nonlinearity, shot: &ZeroShot) -> Result<Option<ZeroMassCandidate>> {
    let nf = nl.params().nf();
    let rmax = 4.0 * shot.r_end;
    let grid = Arc::new(build_grid(
        nl.params(),
        rmax,
        4096,
        default_stretch(4096),
    )?);
    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], -nl.g(y[0]) - (nf - 1.0) / r * y[1]]
    };
    let nodes = grid.nodes();
    let mut values = vec![0.0; nodes.len()];
    values[0] = shot.s0;
    let r0 = (1e-8 * rmax).min(0.5 * nodes[1]);
    let w0 = -nl.g(shot.s0);
    let mut r = r0;
    let mut y = [shot.s0 + w0 * r0 * r0 / (2.0 * nf), w0 * r0 / nf];
    let mut ctrl = StepControl {
        h: 1e-5 * rmax,
        scale: [shot.s0, shot.s0],
        rel_tol: 1e-10,
    };
    let mut next = 1usize;
    let mut grafted = false;
    'outer: while next < nodes.len() {
        if nodes[next] <= r {
            values[next] = y[0];
            next += 1;
            continue;
        }
        for _ in 0..200 {
            let h = ctrl.h.min(nodes[next] - r);
            let clamped = h < ctrl.h;
            let (y_new, err) = dp45_step(&rhs, r, y, h);
            let save = ctrl.h;
            ctrl.h = h;
            if !ctrl.assess(err) {
                continue;
            }
            if clamped {
                ctrl.h = ctrl.h.max(save);
            }
            r += h;
            y = y_new;
            if y[0] <= 0.0 {
                return Ok(None);
            }
            // Past the certification radius the tail is algebraic.
            if r > shot.r_end {
                let (r_d, u_d) = (r, y[0]);
                for k in next..nodes.len() {
                    values[k] = u_d * (nodes[k] / r_d).powf(-(nf - 2.0));
                }
                grafted = true;
                break 'outer;
            }
            if (r - nodes[next]).abs() <= 1e-12 * rmax {
                values[next] = y[0];
                next += 1;
                break;
            }
        }
        if ctrl.h < 1e-16 * rmax {
            return Ok(None);
        }
    }
    if !grafted && next < nodes.len() {
        return Ok(None);
    }
    let u = RadialFunction::new(grid, values)?;
    let norms = u.norms();
    let gv: Vec<f64> = u.values().iter().map(|&v| nl.big_g(v)).collect();
    let z = 0.5 * norms.grad2 - u.grid().integrate(&gv)?;
    let poho = zero_mass_pohozaev_residual(nl, &u)?;
    // Pohozaev filter at 1e-3 relative; Z_G must be nonnegative.
    if poho.abs() > 1e-3 || z < -1e-4 * norms.grad2 {
        return Ok(None);
    }
    Ok(Some(ZeroMassCandidate {
        s0: shot.s0,
        u,
        z_value: z,
        pohozaev_res: poho,
    }))
}

/// Pointwise decay-bound check
/// `|u(R)| <= C R^{-2(N-1)/(q+2)} ‖u‖_{L^q(>R)}^{q/(q+2)} ‖∇u‖_{L²(>R)}^{2/(q+2)}`:
/// fits the constant over an R-window and requires stability under
/// window doubling.
#[derive(Debug, Clone, Copy)]
pub struct DecayCheck {
    pub holds: bool,
    pub c_est: f64,
}

pub fn decay_check(u: &RadialFunction, q: f64) -> DecayCheck {
    let grid = u.grid();
    let nf = grid.params().nf();
    let rate = 2.0 * (nf - 1.0) / (q + 2.0);
    let norms = u.norms();
    if norms.sup == 0.0 {
        return DecayCheck {
            holds: true,
            c_est: 0.0,
        };
    }
    let du = grid.derivative(u.values());
    let c_at = |r_lo: f64, r_hi: f64| -> f64 {
        let mut worst = 0.0f64;
        for (i, &r) in grid.nodes().iter().enumerate() {
            if r < r_lo || r > r_hi {
                continue;
            }
            let mut lq = 0.0;
            let mut g2 = 0.0;
            for (j, &rr) in grid.nodes().iter().enumerate() {
                if rr >= r {
                    lq += grid.weights()[j] * u.values()[j].abs().powf(q);
                    g2 += grid.weights()[j] * du[j] * du[j];
                }
            }
            let den = lq.powf(q / (q + 2.0)) * g2.sqrt().powf(2.0 / (q + 2.0));
            if den > 0.0 {
                worst = worst.max(u.values()[i].abs() * r.powf(rate) / den);
            }
        }
        worst
    };
    let rmax = grid.rmax();
    let c1 = c_at(0.1 * rmax, 0.2 * rmax);
    let c2 = c_at(0.2 * rmax, 0.4 * rmax);
    let c_est = c1.max(c2);
    let stable = if c1 > 0.0 && c2 > 0.0 {
        let ratio = c2 / c1;
        (0.25..=4.0).contains(&ratio)
    } else {
        true
    };
    DecayCheck {
        holds: c_est.is_finite() && stable,
        c_est,
    }
}

/// One row of the perturbation-stability experiment.
#[derive(Debug, Clone, Copy)]
pub struct StabilityRow {
    pub eps: f64,
    pub no_solution: bool,
    pub unreliable: bool,
}

/// Stability table of the non-existence verdict under `G + ε Ξ`.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Largest ε in the list that kept `NoSolutionFound` (empirical
    /// stability-radius surrogate).
    pub threshold: Option<f64>,
    /// False when a larger ε passed while a smaller one failed; such
    /// rows are flagged as scan noise.
    pub monotone: bool,
}

/// Scan `G + ε Ξ` for each ε in the (decreasing) list.
pub fn stability_experiment(
    nl_base: &Nonlinearity,
    xi: &PerturbationXi,
    eps_list: &[f64],
    beta_cap: f64,
    height_grid: &[f64],
) -> Result<StabilityReport> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps list must be strictly decreasing".into()));
    }
    let q = nl_base.params().p();
    let base = g2_scan(nl_base, q, beta_cap, height_grid)?;
    if base.verdict != ZeroMassVerdict::NoSolutionFound {
        return Err(Error::InvalidInput(
            "baseline model already admits zero-mass candidates".into(),
        ));
    }
    let mut rows = Vec::new();
    for &eps in eps_list {
        let nl = Nonlinearity::perturb(nl_base.clone(), xi.clone(), eps);
        let scan = g2_scan(&nl, q, beta_cap, height_grid)?;
        rows.push(StabilityRow {
            eps,
            no_solution: scan.verdict == ZeroMassVerdict::NoSolutionFound,
            unreliable: scan.unreliable,
        });
    }
    // eps_list is decreasing: once a row passes, all smaller eps should
    // pass as well.
    let mut monotone = true;
    let mut seen_pass = false;
    for row in &rows {
        if seen_pass && !row.no_solution {
            monotone = false;
        }
        if row.no_solution {
            seen_pass = true;
        }
    }
    let threshold = rows
        .iter()
        .filter(|r| r.no_solution)
        .map(|r| r.eps)
        .fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a: f64| a.max(e)))
        });
    Ok(StabilityReport {
        rows,
        threshold,
        monotone,
    })
}

/// Log-spaced height grid over `[lo, hi]`.
pub fn log_heights(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}
