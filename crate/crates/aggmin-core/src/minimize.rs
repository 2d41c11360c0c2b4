//! Minimization drivers: explicit-Euler gradient flow on particle ensembles
//! and projected gradient descent on grid densities over the capped,
//! mass-constrained class, both with Armijo backtracking and per-iteration
//! trace recording.

use crate::discretization::{ParticleEnsemble, State};
use crate::energy::{
    confinement_nodes, density_energy_with_field, interaction_psi_nodes, particle_energy,
    particle_velocity,
};
use crate::numerics::{project_capped_box, KbnSum};
use crate::potentials::{Confinement, Kernel};
use crate::{Error, Result};

/// Step-size growth cap relative to `step0`, so adaptive steps stay finite.
const MAX_STEP_GROWTH: f64 = 1e6;
/// Line-search abort threshold relative to `step0`.
const MIN_STEP_FACTOR: f64 = 1e-16;
/// Accepted density steps between full rebuilds of the cached interaction
/// field, which is otherwise updated incrementally.
const PSI_REFRESH_PERIOD: usize = 1024;

/// Solver parameters. `tol_residual` left unset resolves to `1e−8` for
/// particle flows and `1e−6` scaled by the initial multiplier magnitude for
/// density descent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step0: f64,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    pub tol_energy: f64,
    pub tol_residual: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 10_000,
            step0: 0.1,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            tol_energy: 1e-12,
            tol_residual: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.max_iters == 0 {
            problems.push("max_iters must be at least 1".to_string());
        }
        if !(self.step0.is_finite() && self.step0 > 0.0) {
            problems.push(format!("step0 must be positive, got {}", self.step0));
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            problems.push(format!(
                "armijo_shrink must lie in (0, 1), got {}",
                self.armijo_shrink
            ));
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0) {
            problems.push(format!(
                "armijo_slope must lie in (0, 1), got {}",
                self.armijo_slope
            ));
        }
        if !(self.tol_energy.is_finite() && self.tol_energy > 0.0) {
            problems.push(format!(
                "tol_energy must be positive, got {}",
                self.tol_energy
            ));
        }
        if let Some(t) = self.tol_residual {
            if !(t.is_finite() && t > 0.0) {
                problems.push(format!("tol_residual must be positive, got {t}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    EnergyTol,
    ResidualTol,
    MaxIters,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::EnergyTol => "energy_tol",
            Termination::ResidualTol => "residual_tol",
            Termination::MaxIters => "max_iters",
        }
    }
}

/// One accepted iterate. Row 0 records the initial state with step 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub step: f64,
    pub residual: f64,
    pub mass: f64,
}

/// Full iteration history plus the stop reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
}

/// Summary of a finished trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub final_energy: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub monotone: bool,
    pub mass_drift: f64,
}

/// Condenses a trace into its headline numbers.
pub fn convergence_report(trace: &Trace) -> Result<ConvergenceReport> {
    let rows = &trace.rows;
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Domain("empty trace has no summary".into())),
    };
    let monotone = rows.windows(2).all(|w| w[1].energy <= w[0].energy);
    let mass_drift = (last.mass - first.mass).abs() / first.mass.abs().max(f64::MIN_POSITIVE);
    Ok(ConvergenceReport {
        final_energy: last.energy,
        iterations: last.iter,
        termination: trace.termination,
        monotone,
        mass_drift,
    })
}

/// `√(Σ m_i |V_i|²)` — the velocity-norm residual of a particle state.
fn velocity_norm_sq(weights: &[f64], velocity: &[f64], dim: usize) -> f64 {
    let mut acc = KbnSum::default();
    for (i, w) in weights.iter().enumerate() {
        let v2: f64 = velocity[i * dim..(i + 1) * dim].iter().map(|c| c * c).sum();
        acc.add(w * v2);
    }
    acc.value()
}

/// Explicit-Euler gradient flow `x_i ← x_i + τ V_i` with Armijo
/// backtracking on the ensemble energy. A trial step that collides particles
/// is rejected and the step halved; a step collapsing below
/// `1e−16 · step0` aborts as non-convergence.
pub fn particle_flow(
    e: &ParticleEnsemble,
    kernel: &Kernel,
    conf: &Confinement,
    cfg: &SolverConfig,
) -> Result<(ParticleEnsemble, Trace)> {
    cfg.validate()?;
    let tol_residual = cfg.tol_residual.unwrap_or(1e-8);
    let dim = e.dim();

    let mut state = e.clone();
    let mut energy = particle_energy(&state, kernel, conf)?.total;
    let mut velocity = particle_velocity(&state, kernel, conf)?;
    let mut vnorm_sq = velocity_norm_sq(state.weights(), &velocity, dim);
    let mut rows = vec![TraceRow {
        iter: 0,
        energy,
        step: 0.0,
        residual: vnorm_sq.sqrt(),
        mass: state.mass(),
    }];
    if vnorm_sq.sqrt() <= tol_residual {
        return Ok((
            state,
            Trace {
                rows,
                termination: Termination::ResidualTol,
            },
        ));
    }

    let mut tau = cfg.step0;
    let mut termination = Termination::MaxIters;
    for it in 1..=cfg.max_iters {
        let mut tau_try = (2.0 * tau).min(cfg.step0 * MAX_STEP_GROWTH);
        let (next_state, next_energy) = loop {
            if tau_try < MIN_STEP_FACTOR * cfg.step0 {
                return Err(Error::NonConvergence(format!(
                    "line search step collapsed below {:e} at iteration {it}",
                    MIN_STEP_FACTOR * cfg.step0
                )));
            }
            let positions: Vec<f64> = state
                .positions_flat()
                .iter()
                .zip(&velocity)
                .map(|(x, v)| x + tau_try * v)
                .collect();
            let trial = state.with_positions(positions)?;
            match particle_energy(&trial, kernel, conf) {
                // A collision (or other evaluation blow-up) rejects the
                // trial; shrinking the step restores a valid configuration.
                Err(Error::Numerical(_)) => {
                    tau_try *= 0.5;
                    continue;
                }
                Err(other) => return Err(other),
                Ok(b) => {
                    if b.total <= energy - cfg.armijo_slope * tau_try * vnorm_sq {
                        break (trial, b.total);
                    }
                    tau_try *= cfg.armijo_shrink;
                }
            }
        };
        let delta = energy - next_energy;
        state = next_state;
        energy = next_energy;
        tau = tau_try;
        velocity = particle_velocity(&state, kernel, conf)?;
        vnorm_sq = velocity_norm_sq(state.weights(), &velocity, dim);
        rows.push(TraceRow {
            iter: it,
            energy,
            step: tau,
            residual: vnorm_sq.sqrt(),
            mass: state.mass(),
        });
        if vnorm_sq.sqrt() <= tol_residual {
            termination = Termination::ResidualTol;
            break;
        }
        if delta <= cfg.tol_energy * energy.abs().max(f64::EPSILON) {
            termination = Termination::EnergyTol;
            break;
        }
    }
    Ok((state, Trace { rows, termination }))
}

/// Grid-density view shared by the radial and line descent paths.
struct GridProblem {
    weights: Vec<f64>,
    cap: f64,
    conf_values: Vec<f64>,
}

impl GridProblem {
    fn weighted_norm(&self, v: &[f64]) -> f64 {
        let mut acc = KbnSum::default();
        for (x, w) in v.iter().zip(&self.weights) {
            acc.add(w * x * x);
        }
        acc.value().sqrt()
    }
}

fn grid_problem(state: &State, conf: &Confinement) -> Result<GridProblem> {
    match state {
        State::Radial(d) => Ok(GridProblem {
            weights: d.weights().to_vec(),
            cap: d.cap(),
            conf_values: confinement_nodes(state, conf),
        }),
        State::Line(d) => Ok(GridProblem {
            weights: vec![d.cell_width(); d.cells()],
            cap: d.cap(),
            conf_values: confinement_nodes(state, conf),
        }),
        State::Particles(_) => Err(Error::Unsupported(
            "density descent runs on grid densities; use particle_flow for ensembles".into(),
        )),
    }
}

fn grid_values(state: &State) -> &[f64] {
    match state {
        State::Radial(d) => d.values(),
        State::Line(d) => d.values(),
        State::Particles(_) => unreachable!("grid_problem rejects ensembles"),
    }
}

fn grid_with_values(state: &State, values: Vec<f64>) -> Result<State> {
    match state {
        State::Radial(d) => Ok(State::Radial(d.with_values(values)?)),
        State::Line(d) => Ok(State::Line(d.with_values(values)?)),
        State::Particles(_) => unreachable!("grid_problem rejects ensembles"),
    }
}

/// Same grid carrying an iterate difference, which may be negative.
fn grid_with_signed(state: &State, values: Vec<f64>) -> Result<State> {
    match state {
        State::Radial(d) => Ok(State::Radial(d.with_values_signed(values)?)),
        State::Line(d) => Ok(State::Line(d.with_values_signed(values)?)),
        State::Particles(_) => unreachable!("grid_problem rejects ensembles"),
    }
}

/// Projected gradient descent `ρ ← Π(ρ − τ ψ[ρ])` over
/// `{0 ≤ ρ ≤ M, ∫ρ = m}` with Armijo backtracking on the energy.
///
/// The reported residual is the fixed-step optimality measure
/// `‖(ρ − Π(ρ − τ₀ ψ))/τ₀‖_w` at the reference step `τ₀ = step0`.
///
/// A line search that exhausts its step range without finding a certified
/// decrease, while every trial stayed within rounding noise of the current
/// energy, terminates as `energy_tol`: descent has hit floating-point
/// resolution, which satisfies any meaningful energy tolerance.
pub fn density_minimize(
    state: &State,
    kernel: &Kernel,
    conf: &Confinement,
    target_mass: f64,
    cfg: &SolverConfig,
) -> Result<(State, Trace)> {
    cfg.validate()?;
    if !(target_mass.is_finite() && target_mass > 0.0) {
        return Err(Error::Config(format!(
            "target mass must be positive, got {target_mass}"
        )));
    }
    let problem = grid_problem(state, conf)?;

    // Feasible starting point; an already feasible input passes through
    // unchanged.
    let mut values =
        project_capped_box(grid_values(state), &problem.weights, problem.cap, target_mass)?;
    let mut current = grid_with_values(state, values.clone())?;
    let mut psi_k = interaction_psi_nodes(&current, kernel)?;
    let mut energy = density_energy_with_field(&current, conf, &psi_k).total;

    let psi_of = |psi_k: &[f64], problem: &GridProblem| -> Vec<f64> {
        psi_k
            .iter()
            .zip(&problem.conf_values)
            .map(|(k, f)| k + f)
            .collect()
    };
    let residual_of = |values: &[f64], psi: &[f64], problem: &GridProblem| -> Result<f64> {
        let shifted: Vec<f64> = values
            .iter()
            .zip(psi)
            .map(|(v, p)| v - cfg.step0 * p)
            .collect();
        let reference =
            project_capped_box(&shifted, &problem.weights, problem.cap, target_mass)?;
        let scaled: Vec<f64> = values
            .iter()
            .zip(&reference)
            .map(|(v, r)| (v - r) / cfg.step0)
            .collect();
        Ok(problem.weighted_norm(&scaled))
    };

    let mut psi = psi_of(&psi_k, &problem);
    let mut residual = residual_of(&values, &psi, &problem)?;

    // Residual tolerance scales with the initial multiplier size unless set
    // explicitly.
    let tol_residual = match cfg.tol_residual {
        Some(t) => t,
        None => {
            let mass = current.mass();
            let mut acc = KbnSum::default();
            for ((v, w), p) in values.iter().zip(&problem.weights).zip(&psi) {
                acc.add(v * w * p);
            }
            let c0 = acc.value() / mass;
            1e-6 * c0.abs().max(1.0)
        }
    };

    let mut rows = vec![TraceRow {
        iter: 0,
        energy,
        step: 0.0,
        residual,
        mass: current.mass(),
    }];
    if residual <= tol_residual {
        return Ok((
            current,
            Trace {
                rows,
                termination: Termination::ResidualTol,
            },
        ));
    }

    let mut tau = cfg.step0;
    let mut termination = Termination::MaxIters;
    let mut accepted_since_refresh = 0usize;
    for it in 1..=cfg.max_iters {
        let mut tau_try = (2.0 * tau).min(cfg.step0 * MAX_STEP_GROWTH);
        let mut best_delta = f64::INFINITY;
        let accepted = loop {
            if tau_try < MIN_STEP_FACTOR * cfg.step0 {
                // Every candidate step failed the sufficient-decrease test.
                // If no trial ever raised the energy by more than rounding
                // noise, the iterate is a minimizer to within f64 resolution:
                // monotone descent cannot certify further progress, so stop
                // on the energy tolerance. A genuine ascent direction instead
                // means the search failed.
                let noise = 64.0 * f64::EPSILON * energy.abs().max(1.0);
                if best_delta <= noise {
                    termination = Termination::EnergyTol;
                    break None;
                }
                return Err(Error::NonConvergence(format!(
                    "projected line search step collapsed below {:e} at iteration {it}",
                    MIN_STEP_FACTOR * cfg.step0
                )));
            }
            let shifted: Vec<f64> = values
                .iter()
                .zip(&psi)
                .map(|(v, p)| v - tau_try * p)
                .collect();
            let trial_values =
                project_capped_box(&shifted, &problem.weights, problem.cap, target_mass)?;
            let displacement: Vec<f64> = trial_values
                .iter()
                .zip(&values)
                .map(|(a, b)| a - b)
                .collect();
            let disp_norm = problem.weighted_norm(&displacement);
            if disp_norm == 0.0 {
                // Exact fixed point of the projected step.
                termination = Termination::ResidualTol;
                break None;
            }
            // Energy change in difference form,
            //   ΔE = ⟨Δρ, ψ⟩_w + ½⟨Δρ, K∗Δρ⟩_w,
            // built from the displacement alone. Subtracting two full
            // energies instead would round ΔE to ~ε·|E| and drown the
            // small certified decreases of late iterations.
            let diff = grid_with_signed(&current, displacement.clone())?;
            let psi_k_diff = interaction_psi_nodes(&diff, kernel)?;
            let mut lin = KbnSum::default();
            let mut quad = KbnSum::default();
            for i in 0..displacement.len() {
                let w = problem.weights[i];
                lin.add(w * displacement[i] * psi[i]);
                quad.add(w * displacement[i] * psi_k_diff[i]);
            }
            let delta_e = lin.value() + 0.5 * quad.value();
            if !delta_e.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite trial energy change at iteration {it}"
                )));
            }
            best_delta = best_delta.min(delta_e);
            let decrease = cfg.armijo_slope * disp_norm * disp_norm / tau_try;
            if delta_e <= -decrease {
                break Some((trial_values, psi_k_diff, delta_e));
            }
            tau_try *= cfg.armijo_shrink;
        };
        let Some((new_values, psi_k_diff, delta_e)) = accepted else {
            break;
        };
        let delta = -delta_e;
        current = grid_with_values(&current, new_values.clone())?;
        values = new_values;
        accepted_since_refresh += 1;
        if accepted_since_refresh == PSI_REFRESH_PERIOD {
            // The incrementally updated field accumulates rounding; rebuild
            // it from the iterate now and then.
            psi_k = interaction_psi_nodes(&current, kernel)?;
            accepted_since_refresh = 0;
        } else {
            for (p, q) in psi_k.iter_mut().zip(&psi_k_diff) {
                *p += q;
            }
        }
        psi = psi_of(&psi_k, &problem);
        energy += delta_e;
        tau = tau_try;
        residual = residual_of(&values, &psi, &problem)?;
        rows.push(TraceRow {
            iter: it,
            energy,
            step: tau,
            residual,
            mass: current.mass(),
        });
        if residual <= tol_residual {
            termination = Termination::ResidualTol;
            break;
        }
        if delta <= cfg.tol_energy * energy.abs().max(f64::EPSILON) {
            termination = Termination::EnergyTol;
            break;
        }
    }
    Ok((current, Trace { rows, termination }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::RadialDensity;
    use crate::numerics::SeededRng;

    const BALL_RADIUS: f64 = 0.6933612743506347;
    const BALL_HEIGHT: f64 = 0.7161972439135291;
    const PAIR_EQUILIBRIUM: f64 = 0.34668063717531733;

    fn newtonian_quadratic() -> Kernel {
        Kernel::power_law(-1.0, 2.0).unwrap()
    }

    #[test]
    fn config_validation_reports_every_problem() {
        let cfg = SolverConfig {
            max_iters: 0,
            step0: -1.0,
            armijo_shrink: 1.5,
            armijo_slope: 0.0,
            tol_energy: 0.0,
            tol_residual: Some(-1.0),
        };
        let msg = match cfg.validate() {
            Err(Error::Config(m)) => m,
            other => panic!("expected config error, got {other:?}"),
        };
        for needle in [
            "max_iters",
            "step0",
            "armijo_shrink",
            "armijo_slope",
            "tol_energy",
            "tol_residual",
        ] {
            assert!(msg.contains(needle), "missing {needle} in: {msg}");
        }
    }

    #[test]
    fn two_particle_flow_reaches_equilibrium() {
        let e = ParticleEnsemble::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0], vec![0.5, 0.5])
            .unwrap();
        let cfg = SolverConfig {
            max_iters: 5000,
            tol_energy: 1e-18,
            tol_residual: Some(1e-10),
            ..SolverConfig::default()
        };
        let conf = Confinement::quadratic(1.0).unwrap();
        let (final_state, trace) =
            particle_flow(&e, &newtonian_quadratic(), &conf, &cfg).unwrap();
        let a = final_state.position(0)[0];
        assert!(
            (a.abs() - PAIR_EQUILIBRIUM).abs() < 1e-8,
            "half-separation {a}"
        );
        // Near the fixed point the energy decrease per step drops below
        // machine resolution around the same residual level, so either
        // tolerance may fire first; only the budget must not run out.
        assert_ne!(trace.termination, Termination::MaxIters);
        let report = convergence_report(&trace).unwrap();
        assert!(report.monotone);
        assert!(report.mass_drift < 1e-15);
    }

    #[test]
    fn critical_distance_pair_is_a_fixed_point() {
        let e = ParticleEnsemble::new(2, vec![0.5, 0.0, -0.5, 0.0], vec![0.5, 0.5]).unwrap();
        let (final_state, trace) = particle_flow(
            &e,
            &newtonian_quadratic(),
            &Confinement::None,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(final_state, e);
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.termination, Termination::ResidualTol);
        assert_eq!(trace.rows[0].residual, 0.0);
    }

    #[test]
    fn particle_swarm_contracts_to_ball_moment() {
        let mut rng = SeededRng::new(4);
        let e = ParticleEnsemble::sample_uniform_ball(&mut rng, 80, 2.0, &[0.0; 3], 1.0)
            .unwrap();
        let conf = Confinement::quadratic(1.0).unwrap();
        let cfg = SolverConfig {
            max_iters: 600,
            tol_residual: Some(1e-7),
            tol_energy: 1e-15,
            ..SolverConfig::default()
        };
        let (final_state, trace) =
            particle_flow(&e, &newtonian_quadratic(), &conf, &cfg).unwrap();
        let m = final_state.moments();
        // Discrete minimizers track the continuum ball moment loosely at
        // this particle count.
        assert!(
            (m.second_moment - 0.2884499140614816).abs() < 0.1 * 0.2884499140614816,
            "second moment {}",
            m.second_moment
        );
        let report = convergence_report(&trace).unwrap();
        assert!(report.monotone, "energy must never increase");
        for w in trace.rows.windows(2) {
            assert!(w[1].energy < w[0].energy, "accepted steps strictly descend");
        }
    }

    #[test]
    fn flow_is_deterministic() {
        let mut rng = SeededRng::new(21);
        let e = ParticleEnsemble::sample_uniform_ball(&mut rng, 40, 1.5, &[0.0; 3], 1.0)
            .unwrap();
        let conf = Confinement::quadratic(1.0).unwrap();
        let cfg = SolverConfig {
            max_iters: 50,
            ..SolverConfig::default()
        };
        let (sa, ta) = particle_flow(&e, &newtonian_quadratic(), &conf, &cfg).unwrap();
        let (sb, tb) = particle_flow(&e, &newtonian_quadratic(), &conf, &cfg).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn injected_ball_is_recognized_as_stationary() {
        let d = RadialDensity::ball_indicator(3, 1.5, 1024, 0.75, BALL_RADIUS, BALL_HEIGHT)
            .unwrap();
        let conf = Confinement::quadratic(1.0).unwrap();
        let cfg = SolverConfig::default();
        let (_, trace) = density_minimize(
            &State::Radial(d),
            &newtonian_quadratic(),
            &conf,
            1.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::ResidualTol);
        let report = convergence_report(&trace).unwrap();
        assert!(report.iterations <= 5, "took {} iterations", report.iterations);
        let e0 = trace.rows[0].energy;
        let ef = report.final_energy;
        assert!(
            ((ef - e0) / e0).abs() <= 1e-6,
            "energy moved from {e0} to {ef}"
        );
    }

    #[test]
    fn constant_start_descends_to_the_ball_profile() {
        let cells = 512;
        let d = RadialDensity::constant_with_mass(3, 1.5, cells, 0.75, 1.0).unwrap();
        let conf = Confinement::quadratic(1.0).unwrap();
        let cfg = SolverConfig {
            max_iters: 40_000,
            ..SolverConfig::default()
        };
        let (final_state, trace) = density_minimize(
            &State::Radial(d),
            &newtonian_quadratic(),
            &conf,
            1.0,
            &cfg,
        )
        .unwrap();
        let State::Radial(out) = &final_state else {
            panic!("radial in, radial out")
        };
        let report = convergence_report(&trace).unwrap();
        assert!(report.monotone);
        assert!(report.mass_drift < 1e-10);

        let support = out.support_radius(1e-3).unwrap();
        assert!(
            (support - BALL_RADIUS).abs() <= 2.0 * out.cell_width(),
            "support radius {support}"
        );
        // Plateau height: average over the inner half of the support.
        let mut acc = KbnSum::default();
        let mut count = 0usize;
        for i in 0..out.cells() {
            if out.center(i) <= 0.5 * support {
                acc.add(out.values()[i]);
                count += 1;
            }
        }
        let plateau = acc.value() / count as f64;
        assert!(
            ((plateau - BALL_HEIGHT) / BALL_HEIGHT).abs() < 0.02,
            "plateau height {plateau}"
        );
    }

    #[test]
    fn density_descent_rejects_particle_states() {
        let e = ParticleEnsemble::new(1, vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            density_minimize(
                &State::Particles(e),
                &newtonian_quadratic(),
                &Confinement::None,
                1.0,
                &SolverConfig::default(),
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn infeasible_constraint_is_a_config_error() {
        let d = RadialDensity::new(3, 1.0, vec![0.0; 32], 0.01).unwrap();
        assert!(matches!(
            density_minimize(
                &State::Radial(d),
                &newtonian_quadratic(),
                &Confinement::None,
                10.0,
                &SolverConfig::default(),
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn max_iters_termination_is_reported() {
        let d = RadialDensity::constant_with_mass(3, 1.5, 128, 0.75, 1.0).unwrap();
        let conf = Confinement::quadratic(1.0).unwrap();
        let cfg = SolverConfig {
            max_iters: 3,
            ..SolverConfig::default()
        };
        let (_, trace) = density_minimize(
            &State::Radial(d),
            &newtonian_quadratic(),
            &conf,
            1.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::MaxIters);
        assert_eq!(trace.rows.len(), 4);
    }

    #[test]
    fn report_summarizes_traces() {
        let single = Trace {
            rows: vec![TraceRow {
                iter: 0,
                energy: 2.5,
                step: 0.0,
                residual: 0.1,
                mass: 1.0,
            }],
            termination: Termination::ResidualTol,
        };
        let r = convergence_report(&single).unwrap();
        assert_eq!(r.final_energy, 2.5);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.termination, Termination::ResidualTol);
        assert!(r.monotone);
        assert_eq!(r.mass_drift, 0.0);

        let wobble = Trace {
            rows: vec![
                TraceRow {
                    iter: 0,
                    energy: 1.0,
                    step: 0.0,
                    residual: 1.0,
                    mass: 1.0,
                },
                TraceRow {
                    iter: 1,
                    energy: 1.5,
                    step: 0.1,
                    residual: 0.5,
                    mass: 1.0,
                },
            ],
            termination: Termination::MaxIters,
        };
        assert!(!convergence_report(&wobble).unwrap().monotone);

        let empty = Trace {
            rows: vec![],
            termination: Termination::MaxIters,
        };
        assert!(convergence_report(&empty).is_err());
    }
}
