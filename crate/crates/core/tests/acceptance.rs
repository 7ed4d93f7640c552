//! Acceptance suite: one test per exit criterion, each printing a
//! pass/fail line (`cargo test --test acceptance -- --nocapture` to see
//! them all). Tolerances are pinned here, not configurable.

use std::sync::Arc;

use nls_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(n: u32) -> ProblemParams {
    ProblemParams::new(n).unwrap()
}

fn fast_find() -> FindOptions {
    FindOptions {
        grid_n: 2048,
        ..FindOptions::default()
    }
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

/// Criterion 1: power-case scaling identities for N = 2, 3, 4 and
/// mu in {1/4, 1, 4}, each ground state solved independently; all four
/// norms match the scaling laws to 1e-4 relative.
#[test]
fn criterion_01_power_scaling_suite() {
    let mut worst: f64 = 0.0;
    for n_dim in [2u32, 3, 4] {
        let pp = params(n_dim);
        let nl = Nonlinearity::power(pp);
        let m1 = compute_m1(pp).unwrap();
        let nf = pp.nf();
        for mu in [0.25, 1.0, 4.0] {
            let gs = find_ground_state(&nl, mu).unwrap();
            let norms = gs.u.norms();
            let p1 = pp.p_plus_one();
            let psi0 = 0.5 * norms.grad2 + mu * norms.mass - norms.lp1 / p1;
            let checks = [
                (2.0 * norms.mass, 2.0 * m1),          // ‖ω‖₂² = 2 m₁
                (norms.grad2, mu * nf * m1),           // ‖∇ω‖₂² = μN m₁
                (norms.lp1, mu * (nf + 2.0) * m1),     // ‖ω‖_{p+1}^{p+1} = μ(N+2) m₁
                (psi0, mu * m1),                       // Ψ_{0μ}(ω_μ) = μ m₁
            ];
            for (got, expect) in checks {
                worst = worst.max((got / expect - 1.0).abs());
            }
        }
    }
    report(
        "criterion 1 (power scaling suite)",
        worst <= 1e-4,
        &format!("worst relative deviation {worst:.3e} (tol 1e-4)"),
    );
}

/// Criterion 2: b(λ) vanishes identically for the pure power at
/// critical mass: |b(λ)| <= 1e-3 e^λ m₁ across 25 samples in [-4, 4].
#[test]
fn criterion_02_power_level_vanishes() {
    let pp = params(2);
    let nl = Nonlinearity::power(pp);
    let m1 = compute_m1(pp).unwrap();
    let mut worst = 0.0f64;
    for i in 0..25 {
        let lambda = -4.0 + 8.0 * i as f64 / 24.0;
        let b = b_of_lambda_with(&nl, lambda, m1, &fast_find()).unwrap();
        worst = worst.max(b.abs() / (lambda.exp() * m1));
    }
    report(
        "criterion 2 (b0 identically zero)",
        worst <= 1e-3,
        &format!("max |b|/(e^λ m₁) = {worst:.3e} (tol 1e-3)"),
    );
}

/// Criterion 3: plateau level of the exact (1+α)-power model:
/// a(1) (1+α)^{2/(p-1)} = m₁ to 1e-4 relative for α = ±0.3.
#[test]
fn criterion_03_plateau_level() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let mut worst = 0.0f64;
    for alpha in [-0.3, 0.3] {
        let nl = Nonlinearity::scaled_power(pp, alpha);
        let gs = find_ground_state_with(&nl, 1.0, &fast_find()).unwrap();
        let lhs = gs.action * (1.0 + alpha).powf(pp.two_over_p_minus_one());
        worst = worst.max((lhs / m1 - 1.0).abs());
    }
    report(
        "criterion 3 (plateau level)",
        worst <= 1e-4,
        &format!("worst relative deviation {worst:.3e} (tol 1e-4)"),
    );
}

/// Criterion 4: |β(a;0) - (1+α)^{-2/(p-1)} m₁| strictly decreasing over
/// L in {2, 8, 32} for α = ±0.3.
#[test]
fn criterion_04_plateau_width_trend() {
    let pp = params(2);
    let mut detail = String::new();
    let mut pass = true;
    for alpha in [0.3, -0.3] {
        let rows = leps_experiment_with(alpha, &[2.0, 8.0, 32.0], pp, &fast_find()).unwrap();
        let decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
        pass &= decreasing;
        detail.push_str(&format!(
            "alpha={alpha}: [{:.2e}, {:.2e}, {:.2e}] ",
            rows[0].deviation, rows[1].deviation, rows[2].deviation
        ));
    }
    report("criterion 4 (plateau width trend)", pass, detail.trim());
}

/// Criterion 5: the two-scale profile with α₁ = -0.3, α₂ = +0.3 gives
/// β(a_ℓ;0) > m₁ > β(a_ℓ;ℓ) with margin >= 5x solver noise, and the
/// λ-scan classifies as case i.
#[test]
fn criterion_05_two_scale_example() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let a1 = make_profile_a(-0.3, 4.0, pp, None).unwrap();
    let a2 = make_profile_a(0.3, 4.0, pp, None).unwrap();
    let min_ell = match make_two_scale(a1.clone(), a2.clone(), 0.0, pp) {
        Err(Error::OverlappingSupports { min_ell }) => min_ell,
        other => panic!("expected overlap rejection, got {other:?}"),
    };
    let ell = (min_ell + 1.0).ceil();
    let nl = make_two_scale(a1, a2, ell, pp).unwrap();
    let beta0 = beta_of_with(&nl, 0.0, &fast_find()).unwrap();
    let beta_ell = beta_of_with(&nl, ell, &fast_find()).unwrap();
    let noise = 1e-4 * m1;
    let ordered = beta0 > m1 + 5.0 * noise && m1 - 5.0 * noise > beta_ell;
    let scan = scan_b_with(
        &nl,
        m1,
        (-6.0, ell + 6.0),
        35,
        &ScanOptions {
            find: fast_find(),
            ..ScanOptions::default()
        },
    )
    .unwrap();
    report(
        "criterion 5 (two-scale example)",
        ordered && scan.case_tag == CaseTag::I,
        &format!(
            "ell={ell}: beta(0)={beta0:.5} > m1={m1:.5} > beta(ell)={beta_ell:.5}; case {:?}",
            scan.case_tag
        ),
    );
}

/// Criterion 6: bump families classify as case iii (G >= G₀) and
/// case ii (G <= G₀), stable under doubled resolution and sampling.
#[test]
fn criterion_06_sign_dichotomy() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (above, want) in [(true, CaseTag::III), (false, CaseTag::II)] {
        let nl = Nonlinearity::bump_family(pp, above, 0.2).unwrap();
        let coarse = scan_b_with(
            &nl,
            m1,
            (-4.0, 4.0),
            25,
            &ScanOptions {
                find: fast_find(),
                ..ScanOptions::default()
            },
        )
        .unwrap();
        let refined = scan_b_with(
            &nl,
            m1,
            (-4.0, 4.0),
            50,
            &ScanOptions {
                find: FindOptions {
                    grid_n: 4096,
                    ..FindOptions::default()
                },
                ..ScanOptions::default()
            },
        )
        .unwrap();
        pass &= coarse.case_tag == want && refined.case_tag == want;
        detail.push_str(&format!(
            "{}: {:?}/{:?} (want {want:?}) ",
            if above { "G>=G0" } else { "G<=G0" },
            coarse.case_tag,
            refined.case_tag
        ));
    }
    report("criterion 6 (sign dichotomy)", pass, detail.trim());
}

/// Criterion 7: d = b̲ on the G >= G₀ bump family, flow and λ-scan as
/// independent pipelines, gap <= max(1e-3 |d|, 1e-4 m₁).
#[test]
fn criterion_07_d_equals_b_lower() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let nl = Nonlinearity::bump_family(pp, true, 0.2).unwrap();
    let gap = verify_d_equals_ubar(
        &nl,
        m1,
        &FlowOptions {
            grid_n: 4096,
            rmax: 30.0,
            record_every: 100,
            ..FlowOptions::default()
        },
        &ScanOptions {
            find: fast_find(),
            ..ScanOptions::default()
        },
        (-4.0, 4.0),
        25,
    )
    .unwrap();
    let tol = (1e-3 * gap.d.abs()).max(1e-4 * m1);
    report(
        "criterion 7 (d equals inf b)",
        gap.gap <= tol && gap.flow_verdict == FlowVerdict::Converged,
        &format!(
            "d={:.6}, b_lower={:.6}, gap={:.3e} (tol {:.3e}), verdict {:?}",
            gap.d, gap.b_lower, gap.gap, tol, gap.flow_verdict
        ),
    );
}

/// Criterion 8: Legendre-type relation d(m₁) = inf_μ (a(μ) - μ m₁) on
/// the power and bump families.
#[test]
fn criterion_08_legendre_relation() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let mu_grid: Vec<f64> = (0..25)
        .map(|i| (-4.0 + 8.0 * i as f64 / 24.0f64).exp())
        .collect();
    let mut pass = true;
    let mut detail = String::new();
    // Power case: both sides sit at the zero plateau; the fine grid
    // keeps the flow's spurious scaling drift below tolerance.
    let power = legendre_check(
        &Nonlinearity::power(pp),
        m1,
        &mu_grid,
        &FlowOptions {
            grid_n: 16384,
            rmax: 30.0,
            record_every: 100,
            ..FlowOptions::default()
        },
        &fast_find(),
    )
    .unwrap();
    let tol_p = (1e-3 * power.lhs.abs()).max(1e-4 * m1);
    pass &= power.gap <= tol_p;
    detail.push_str(&format!("power gap={:.3e} (tol {:.3e}); ", power.gap, tol_p));
    let bump = legendre_check(
        &Nonlinearity::bump_family(pp, true, 0.2).unwrap(),
        m1,
        &mu_grid,
        &FlowOptions {
            grid_n: 4096,
            rmax: 30.0,
            record_every: 100,
            ..FlowOptions::default()
        },
        &fast_find(),
    )
    .unwrap();
    let tol_b = (1e-3 * bump.lhs.abs()).max(1e-4 * m1);
    pass &= bump.gap <= tol_b;
    detail.push_str(&format!("bump gap={:.3e} (tol {:.3e})", bump.gap, tol_b));
    report("criterion 8 (legendre relation)", pass, &detail);
}

/// Criterion 9: non-attainment for the (ρ+1) family with α = 0.5 — the
/// flow's energy enters [-1.02, -0.98]·α m₁ with verdict Concentrating.
#[test]
fn criterion_09_non_attainment() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let alpha = 0.5;
    let nl = Nonlinearity::rho_family(pp, alpha).unwrap();
    let opts = FlowOptions {
        max_iter: 60_000,
        grid_n: 4096,
        rmax: 24.0,
        record_every: 500,
        ..FlowOptions::default()
    };
    let grid = Arc::new(
        build_grid(pp, opts.rmax, opts.grid_n, default_stretch(opts.grid_n)).unwrap(),
    );
    let seed = RadialFunction::from_fn(grid, |r| (-(r / 4.0) * (r / 4.0)).exp()).unwrap();
    let rep = minimize_d(&nl, m1, &seed, &opts).unwrap();
    let target = -alpha * m1;
    let in_band = rep.d_estimate >= 1.02 * target && rep.d_estimate <= 0.98 * target;
    // Along the way the energy never undercuts the theoretical floor
    // -α m₁ beyond the band tolerance.
    let floor_ok = rep
        .trajectory
        .iter()
        .all(|p| p.energy >= 1.02 * target - 1e-9);
    report(
        "criterion 9 (non-attainment)",
        rep.verdict == FlowVerdict::Concentrating && in_band && floor_ok,
        &format!(
            "verdict {:?}, d={:.5} vs -αm₁={:.5} (band ±2%), floor held: {floor_ok}",
            rep.verdict, rep.d_estimate, target
        ),
    );
}

/// Criterion 10: zero-mass scans of the pure power find no positive
/// decaying solution for N = 2, 3, 4 with at most 20% inconclusive.
#[test]
fn criterion_10_zero_mass_power() {
    let mut pass = true;
    let mut detail = String::new();
    for n_dim in [2u32, 3, 4] {
        let pp = params(n_dim);
        let nl = Nonlinearity::power(pp);
        let heights = log_heights(1e-3, 1e3, 40);
        let scan = g2_scan(&nl, pp.p(), 10.0, &heights).unwrap();
        let ok = scan.verdict == ZeroMassVerdict::NoSolutionFound
            && scan.inconclusive_fraction <= 0.2;
        pass &= ok;
        detail.push_str(&format!(
            "N={n_dim}: {:?} inconclusive {:.0}%; ",
            scan.verdict,
            100.0 * scan.inconclusive_fraction
        ));
    }
    report("criterion 10 (zero-mass power)", pass, detail.trim());
}

/// Criterion 11: non-existence verdict of the zero-mass example is
/// stable under the Sobolev-bump perturbation for the two smallest
/// entries of a decreasing ε list (N = 3).
#[test]
fn criterion_11_zero_mass_stability() {
    let pp = params(3);
    let nl = make_g2_example(pp, 0.0).unwrap();
    let xi = PerturbationXi::sobolev_bump(pp).unwrap();
    let heights = log_heights(1e-3, 1e3, 40);
    let rep = stability_experiment(&nl, &xi, &[0.3, 0.1, 0.03], 10.0, &heights).unwrap();
    let k = rep.rows.len();
    let two_smallest = rep.rows[k - 2].no_solution && rep.rows[k - 1].no_solution;
    report(
        "criterion 11 (zero-mass stability)",
        two_smallest && rep.monotone,
        &format!(
            "rows: {:?}, threshold {:?}, monotone {}",
            rep.rows
                .iter()
                .map(|r| (r.eps, r.no_solution))
                .collect::<Vec<_>>(),
            rep.threshold,
            rep.monotone
        ),
    );
}

/// Criterion 12: property suites — exact mass projection, energy
/// monotonicity of the flow, residuals at 1e-4 on accepted solutions,
/// the Gagliardo-Nirenberg inequality on 100 random admissible inputs,
/// and the L²-isometry of the frequency rescaling.
#[test]
fn criterion_12_property_suites() {
    let pp = params(2);
    let m1 = compute_m1(pp).unwrap();
    let grid = Arc::new(build_grid(pp, 24.0, 2048, default_stretch(2048)).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_810);
    let mut pass = true;
    let mut detail = String::new();

    // Mass projection exact to 1e-13·m on random profiles.
    let mut worst_mass = 0.0f64;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(0.2..3.0);
        let w: f64 = rng.gen_range(0.5..4.0);
        let u = RadialFunction::from_fn(grid.clone(), |r| a * (-(r / w) * (r / w)).exp())
            .unwrap();
        let m: f64 = rng.gen_range(0.5..10.0);
        let (_, after) = project_to_mass(&u, m).unwrap();
        worst_mass = worst_mass.max((after - m).abs() / m);
    }
    pass &= worst_mass <= 1e-13;
    detail.push_str(&format!("projection drift {worst_mass:.2e}; "));

    // Flow energy monotone along a converging run.
    let nl = Nonlinearity::bump_family(pp, true, 0.2).unwrap();
    let rep = minimize_d_multi(
        &nl,
        m1,
        &FlowOptions {
            grid_n: 2048,
            rmax: 24.0,
            record_every: 1,
            ..FlowOptions::default()
        },
    )
    .unwrap();
    let monotone = rep
        .trajectory
        .windows(2)
        .all(|w| w[1].energy <= w[0].energy + 1e-12 * (1.0 + w[0].energy.abs()));
    pass &= monotone;
    detail.push_str(&format!("flow monotone {monotone}; "));

    // Residuals <= 1e-4 on freshly accepted solutions.
    let mut worst_res = 0.0f64;
    for n_dim in [2u32, 3, 4] {
        let nlp = Nonlinearity::power(params(n_dim));
        let gs = find_ground_state_with(&nlp, 1.0, &fast_find()).unwrap();
        worst_res = worst_res.max(gs.pohozaev_res.abs().max(gs.nehari_res.abs()));
    }
    pass &= worst_res <= 1e-4;
    detail.push_str(&format!("residuals {worst_res:.2e}; "));

    // GN inequality on 100 random Gaussian mixtures with mass <= m₁.
    let mut gn_all = true;
    for _ in 0..100 {
        let a1: f64 = rng.gen_range(0.1..1.0);
        let a2: f64 = rng.gen_range(0.0..0.5);
        let w1: f64 = rng.gen_range(0.5..3.0);
        let w2: f64 = rng.gen_range(0.5..3.0);
        let raw = RadialFunction::from_fn(grid.clone(), |r| {
            a1 * (-(r / w1) * (r / w1)).exp() + a2 * (-(r / w2) * (r / w2)).exp()
        })
        .unwrap();
        let target: f64 = rng.gen_range(0.05..1.0) * m1;
        let scale = (target / raw.norms().mass).sqrt();
        let u = RadialFunction::new(
            grid.clone(),
            raw.values().iter().map(|v| v * scale).collect(),
        )
        .unwrap();
        let chk = gn_check(&u, m1);
        gn_all &= chk.holds && !chk.vacuous;
    }
    pass &= gn_all;
    detail.push_str(&format!("GN holds on 100 draws: {gn_all}; "));

    // Frequency rescaling is an L² isometry at 1e-6.
    let u = RadialFunction::from_fn(grid.clone(), |r| (-r * r / 2.0).exp()).unwrap();
    let mut worst_iso = 0.0f64;
    for mu in [0.25, 1.0, 4.0, 16.0] {
        let v = rescale_mu(&u, mu).unwrap();
        worst_iso = worst_iso.max((v.norms().mass / u.norms().mass - 1.0).abs());
    }
    pass &= worst_iso <= 1e-6;
    detail.push_str(&format!("rescale isometry {worst_iso:.2e}"));

    report("criterion 12 (property suites)", pass, &detail);
}
