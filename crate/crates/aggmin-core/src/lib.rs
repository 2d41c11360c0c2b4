//! Minimization of nonlocal interaction energies over mass-constrained,
//! height-capped densities and weighted particle ensembles.
//!
//! The energy of a state `ρ` is
//!
//! ```text
//! E[ρ] = 1/2 ∬ K(x − y) ρ(x) ρ(y) dx dy + ∫ F(x) ρ(x) dx
//! ```
//!
//! with an interaction kernel `K` (power-law attraction/repulsion or
//! exponential) and an external confinement `F`. States are either free
//! particles carrying point masses, radially symmetric densities on a shell
//! grid, or densities on a symmetric interval. Minimization runs projected
//! gradient descent with Armijo backtracking; candidate minimizers are checked
//! against the first-order stationarity conditions (the generated potential
//! `ψ = K ∗ ρ + F` is constant on the support and no smaller elsewhere).
//! Closed-form solutions (uniform ball, quadratic interval profile,
//! symmetric particle pair) are provided for cross-validation.

pub mod analytic;
pub mod discretization;
pub mod energy;
pub mod euler_lagrange;
pub mod minimize;
pub mod numerics;
pub mod potentials;

pub use analytic::{
    ball_energy, ball_phi, ball_psi, ball_solution, exp1d_cell_average, exp1d_profile,
    exp1d_support, two_particle_equilibrium, BallSolution, Exp1dSolution,
};
pub use discretization::{
    LineDensity, Moments, ParticleEnsemble, RadialDensity, State,
};
pub use energy::{
    density_energy, energy_decomposition, h_minus1_norm_sq, hls_check, particle_energy,
    particle_velocity, psi_field, radial_interaction_potential, state_energy, EnergyBreakdown,
    EnergyDecomposition, HlsCheck, PsiField,
};
pub use euler_lagrange::{el_verify, multiplier_c0, node_potentials, ElReport};
pub use minimize::{
    convergence_report, density_minimize, particle_flow, ConvergenceReport, SolverConfig,
    Termination, Trace, TraceRow,
};
pub use numerics::{
    compensated_sum, hls_sharp_constant, log_gamma, project_capped_box, unit_ball_volume,
    KbnSum, SeededRng,
};
pub use potentials::{Confinement, Kernel, PowerLawKernel};

/// Errors reported by solver and evaluation routines.
///
/// The variants map onto process exit codes in the command-line front end:
/// configuration and domain problems are usage errors, numerical failures
/// indicate an aborted computation, and non-convergence means the iteration
/// budget ran out before any tolerance was met.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value or combination of values is invalid.
    #[error("config error: {0}")]
    Config(String),
    /// The requested combination of kernel, state, and operation is not
    /// implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A computation produced or would produce non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The iteration limit was reached, or the line search collapsed, before
    /// any convergence tolerance was satisfied.
    #[error("did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
