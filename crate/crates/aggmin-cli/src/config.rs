//! Run configuration: JSON schema, cross-field validation, and construction
//! of the initial state, kernel, and confinement it describes.

use aggmin_core::{
    unit_ball_volume, Confinement, Error, Exp1dSolution, Kernel, LineDensity, ParticleEnsemble,
    RadialDensity, Result, SeededRng, SolverConfig, State,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub kernel: KernelSpec,
    pub confinement: ConfinementSpec,
    pub state: StateSpec,
    pub constraint: ConstraintSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    PowerLaw { p: f64, q: f64 },
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfinementSpec {
    None,
    Quadratic { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Particles { count: usize, radius: f64, seed: u64 },
    Radial { cells: usize, rmax: f64 },
    Line { cells: usize, halfwidth: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    /// Height cap `M`; grids require it, particle runs ignore it.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    /// Total mass `m`.
    #[serde(rename = "m")]
    pub mass: f64,
}

/// Optional solver overrides; anything left out keeps the library default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub armijo_shrink: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub armijo_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,
}

impl SolverSpec {
    pub fn to_solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.step0 {
            cfg.step0 = v;
        }
        if let Some(v) = self.armijo_shrink {
            cfg.armijo_shrink = v;
        }
        if let Some(v) = self.armijo_slope {
            cfg.armijo_slope = v;
        }
        if let Some(v) = self.tol_energy {
            cfg.tol_energy = v;
        }
        if self.tol_residual.is_some() {
            cfg.tol_residual = self.tol_residual;
        }
        cfg
    }
}

impl RunConfig {
    pub fn kernel(&self) -> Result<Kernel> {
        match self.kernel {
            KernelSpec::PowerLaw { p, q } => Kernel::power_law(p, q),
            KernelSpec::Exponential => Ok(Kernel::Exponential),
        }
    }

    pub fn confinement(&self) -> Result<Confinement> {
        match self.confinement {
            ConfinementSpec::None => Ok(Confinement::None),
            ConfinementSpec::Quadratic { beta } => Confinement::quadratic(beta),
        }
    }

    fn beta(&self) -> f64 {
        match self.confinement {
            ConfinementSpec::None => 0.0,
            ConfinementSpec::Quadratic { beta } => beta,
        }
    }

    /// Every cross-field violation, in declaration order. An empty list means
    /// the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dim == 0 {
            out.push("dimension must be positive".to_string());
        }
        if let KernelSpec::PowerLaw { p, q } = self.kernel {
            if !(p.is_finite() && q.is_finite()) {
                out.push(format!("kernel exponents must be finite, got p={p}, q={q}"));
            } else {
                if q <= p {
                    out.push(format!("kernel exponents must satisfy q > p, got p={p}, q={q}"));
                }
                if p == 0.0 || q == 0.0 {
                    out.push("kernel exponents must be nonzero".to_string());
                }
                if self.dim > 0 && p <= -(self.dim as f64) {
                    out.push(format!(
                        "kernel exponent p={p} must exceed −N = {}",
                        -(self.dim as f64)
                    ));
                }
            }
        }
        if let ConfinementSpec::Quadratic { beta } = self.confinement {
            if !(beta.is_finite() && beta >= 0.0) {
                out.push(format!("confinement strength must be nonnegative, got {beta}"));
            }
        }

        match self.state {
            StateSpec::Particles { count, radius, .. } => {
                if count == 0 {
                    out.push("particle count must be positive".to_string());
                }
                if !(radius.is_finite() && radius > 0.0) {
                    out.push(format!("sampling radius must be positive, got {radius}"));
                }
                if matches!(self.kernel, KernelSpec::Exponential) {
                    out.push(
                        "kernel/discretization mismatch: the exponential kernel runs on the \
                         line grid only"
                            .to_string(),
                    );
                }
            }
            StateSpec::Radial { cells, rmax } => {
                if cells == 0 {
                    out.push("radial grid needs at least one cell".to_string());
                }
                if !(rmax.is_finite() && rmax > 0.0) {
                    out.push(format!("rmax must be positive, got {rmax}"));
                }
                if self.dim <= 2 {
                    out.push(format!(
                        "radial discretization requires dimension N > 2, got {}",
                        self.dim
                    ));
                }
                let matches_newtonian = matches!(
                    self.kernel,
                    KernelSpec::PowerLaw { p, q }
                        if (q - 2.0).abs() <= 1e-12
                            && (p - (2.0 - self.dim as f64)).abs() <= 1e-12
                );
                if !matches_newtonian {
                    out.push(
                        "kernel/discretization mismatch: the radial evaluator requires the \
                         power-law kernel with q=2 and p=2−N"
                            .to_string(),
                    );
                }
            }
            StateSpec::Line { cells, halfwidth } => {
                if cells == 0 {
                    out.push("line grid needs at least one cell".to_string());
                }
                if !(halfwidth.is_finite() && halfwidth > 0.0) {
                    out.push(format!("half-width must be positive, got {halfwidth}"));
                }
                if self.dim != 1 {
                    out.push(format!(
                        "line discretization requires dimension N = 1, got {}",
                        self.dim
                    ));
                }
                if let KernelSpec::PowerLaw { p, .. } = self.kernel {
                    if p <= -1.0 {
                        out.push(format!(
                            "kernel/discretization mismatch: the line evaluator requires \
                             p > −1, got p={p}"
                        ));
                    }
                }
            }
        }

        let mass = self.constraint.mass;
        if !(mass.is_finite() && mass > 0.0) {
            out.push(format!("constraint mass m must be positive, got {mass}"));
        }
        let grid = !matches!(self.state, StateSpec::Particles { .. });
        match self.constraint.cap {
            None if grid => {
                out.push("constraint M is required for grid densities".to_string());
            }
            Some(cap) if !(cap.is_finite() && cap > 0.0) => {
                out.push(format!("constraint M must be positive, got {cap}"));
            }
            Some(cap) if grid && mass.is_finite() && mass > 0.0 => {
                let capacity = match self.state {
                    StateSpec::Radial { rmax, .. } => {
                        cap * unit_ball_volume(self.dim) * rmax.powi(self.dim as i32)
                    }
                    StateSpec::Line { halfwidth, .. } => cap * 2.0 * halfwidth,
                    StateSpec::Particles { .. } => unreachable!(),
                };
                if capacity < mass * (1.0 - 1e-12) {
                    out.push(format!(
                        "constraint infeasible: the grid holds at most mass {capacity} \
                         under cap M={cap}, but m={mass}"
                    ));
                }
            }
            _ => {}
        }

        if let Err(Error::Config(msg)) = self.solver.to_solver_config().validate() {
            out.push(msg);
        }
        out
    }

    /// Non-fatal observations: currently, a cap low enough that the known
    /// reference profiles would not fit under it.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mass = self.constraint.mass;
        let Some(cap) = self.constraint.cap else {
            return out;
        };
        if !(mass.is_finite() && mass > 0.0 && cap.is_finite() && cap > 0.0) {
            return out;
        }
        match self.state {
            StateSpec::Radial { .. } if self.dim > 2 => {
                let plateau = (mass + 2.0 * self.beta()) / unit_ball_volume(self.dim);
                if cap < plateau * (1.0 - 1e-12) {
                    out.push(format!(
                        "cap M={cap} sits below the unconstrained plateau height \
                         {plateau}; the minimizer will saturate the cap"
                    ));
                }
            }
            StateSpec::Line { .. } => {
                if matches!(self.kernel, KernelSpec::Exponential) && self.beta() > 0.0 {
                    if let Ok(sol) = Exp1dSolution::new(mass, self.beta()) {
                        if cap < sol.peak() * (1.0 - 1e-12) {
                            out.push(format!(
                                "cap M={cap} sits below the unconstrained peak value {}; \
                                 the minimizer will saturate the cap",
                                sol.peak()
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
        out
    }

    /// The state the run starts from: a constant density at the target mass
    /// for grids, a seeded uniform ball sample for particles.
    pub fn initial_state(&self) -> Result<State> {
        let mass = self.constraint.mass;
        match self.state {
            StateSpec::Particles {
                count,
                radius,
                seed,
            } => {
                let mut rng = SeededRng::new(seed);
                let center = vec![0.0; self.dim];
                Ok(State::Particles(ParticleEnsemble::sample_uniform_ball(
                    &mut rng, count, radius, &center, mass,
                )?))
            }
            StateSpec::Radial { cells, rmax } => {
                let cap = self.cap_required()?;
                Ok(State::Radial(RadialDensity::constant_with_mass(
                    self.dim, rmax, cells, cap, mass,
                )?))
            }
            StateSpec::Line { cells, halfwidth } => {
                let cap = self.cap_required()?;
                Ok(State::Line(LineDensity::constant_with_mass(
                    halfwidth, cells, cap, mass,
                )?))
            }
        }
    }

    pub fn cap_required(&self) -> Result<f64> {
        self.constraint
            .cap
            .ok_or_else(|| Error::Config("constraint M is required for grid densities".into()))
    }
}

/// Reads and fully validates a configuration file. All violations are
/// reported in one message.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config parse error in {}: {e}", path.display())))?;
    let violations = cfg.violations();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(violations.join("; ")))
    }
}
