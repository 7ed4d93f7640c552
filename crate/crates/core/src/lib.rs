//! Numerical laboratory for mass-critical radial NLS equations
//! `-Δu + μu = g(u)` with prescribed mass `½‖u‖₂² = m`.
//!
//! The crate computes the variational quantities attached to this problem:
//! ground states `ω_μ`/`w_μ` by radial shooting, the critical mass `m₁`,
//! fixed-frequency action levels `a(μ)` and their mass-shifted version
//! `b(λ) = a(e^λ) - e^λ m₁`, the constrained infimum `d` over the L²-sphere
//! by normalized gradient flow, and zero-mass solvability scans for
//! `-Δu = g(u)`. Nonlinearities cover the pure power `|s|^{p-1}s` with
//! `p = 1 + 4/N`, plateau-profile perturbations, bump families above/below
//! the power, `ρ`-families with linear growth at infinity, and tabulated data.

pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod interp;
pub mod minimax;
pub mod nonlinearity;
pub mod params;
pub mod profile;
pub mod shooting;
pub mod zeromass;

pub use error::Error;
pub use flow::{
    legendre_check, minimize_d, minimize_d_multi, n2_dilation_improve, project_to_mass,
    verify_d_equals_ubar, DGap, FlowOptions, FlowReport, FlowVerdict, LegendreReport,
    TrajectoryPoint,
};
pub use functionals::{
    dt_energy_along_dilation, evaluate, gn_check, nehari_residual, pohozaev_residual,
    zero_mass_pohozaev_residual, FunctionalValues, GnCheck,
};
pub use grid::{
    build_grid, default_stretch, dilate_mass_preserving, rescale_mu, rescale_mu_onto, Norms,
    RadialFunction, RadialGrid, DEFAULT_NODES,
};
pub use minimax::{
    beta_of, beta_of_with, leps_experiment, leps_experiment_with, scan_b, scan_b_with, CaseTag,
    LepsRow, LevelSample, LevelScan, ScanOptions,
};
pub use nonlinearity::{
    check_conditions, make_g2_example, make_two_scale, sobolev_quotient_deriv, xi_norm,
    CombinedProfile, ConditionReport, ConditionVerdict, Nonlinearity, PerturbationXi,
};
pub use params::ProblemParams;
pub use profile::{make_profile_a, ProfileA};
pub use shooting::{
    b_of_lambda, b_of_lambda_with, compute_m1, compute_m1_uncached, find_ground_state,
    find_ground_state_with, shoot, BlowReason, FindOptions, GroundState, ShootSettings,
    ShotClass, ShotOutcome,
};
pub use zeromass::{
    decay_check, g2_scan, log_heights, stability_experiment, zero_mass_shoot,
    zero_mass_shoot_with, DecayCheck, StabilityReport, StabilityRow, ZeroMassCandidate,
    ZeroMassClass, ZeroMassScan, ZeroMassVerdict, ZeroShootSettings, ZeroShot,
};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
