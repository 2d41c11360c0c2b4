//! Energy evaluation: the interaction + confinement functional, the
//! generated potential field `ψ = K ∗ ρ + F`, particle velocities, the
//! negative-Sobolev decomposition of the Newtonian-quadratic energy, and
//! Hardy–Littlewood–Sobolev diagnostics.

use crate::discretization::{LineDensity, ParticleEnsemble, RadialDensity, State};
use crate::numerics::{
    hls_sharp_constant, reduce_chunked, run_chunked, try_reduce_chunked, KbnSum,
};
use crate::potentials::{Confinement, Kernel, MIN_SEPARATION};
use crate::{Error, Result};

/// Rows per work chunk in pairwise loops. Fixed so that chunk boundaries,
/// and therefore floating-point totals, do not depend on the worker count.
const ROW_CHUNK: usize = 64;

/// Interaction and confinement parts of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub interaction: f64,
    pub confinement: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(interaction: f64, confinement: f64) -> Self {
        EnergyBreakdown {
            interaction,
            confinement,
            total: interaction + confinement,
        }
    }
}

/// Potential `ψ` sampled at a list of evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Terms of the centered Newtonian-quadratic energy
/// `E = (m/2)∫|x|²ρ + β∫|x|²ρ + (Nω_N/2)·‖ρ‖²_{H⁻¹}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDecomposition {
    pub quad_moment_part: f64,
    pub confinement_part: f64,
    pub h1_part: f64,
    pub total: f64,
}

/// Two-sided Hardy–Littlewood–Sobolev diagnostic for a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlsCheck {
    /// `∬ |x−y|^γ ρ(x) ρ(y)`
    pub lhs: f64,
    /// `C(γ) · ‖ρ‖²` in the critical Lebesgue norm
    pub norm_bound: f64,
    /// `C(γ) · M^{−γ/N} · m^{(2N+γ)/N}`
    pub interp_bound: f64,
    pub ok: bool,
}

fn check_kernel_dim(kernel: &Kernel, dim: usize) -> Result<()> {
    if let Kernel::PowerLaw(k) = kernel {
        k.check_dim(dim)?;
    }
    Ok(())
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Kernel value for a particle pair, with coincidence handling: singular
/// kernels refuse coincident pairs, bounded kernels take their origin limit.
pub(crate) fn pair_kernel_value(kernel: &Kernel, d: f64, i: usize, j: usize) -> Result<f64> {
    if d < MIN_SEPARATION {
        if kernel.is_singular() {
            return Err(Error::Numerical(format!(
                "particles {i} and {j} coincide (separation {d:e}) under a kernel singular at the origin"
            )));
        }
        if d == 0.0 {
            return Ok(match kernel {
                Kernel::Exponential => 1.0,
                Kernel::PowerLaw(_) => 0.0,
            });
        }
    }
    kernel.value(d)
}

// ---------------------------------------------------------------------------
// Particle ensembles
// ---------------------------------------------------------------------------

/// Energy of a particle ensemble:
/// `½ Σ_{i≠j} m_i m_j K(|x_i−x_j|) + Σ_i m_i F(x_i)`,
/// accumulated over ordered index pairs with compensated summation.
pub fn particle_energy(
    e: &ParticleEnsemble,
    kernel: &Kernel,
    conf: &Confinement,
) -> Result<EnergyBreakdown> {
    check_kernel_dim(kernel, e.dim())?;
    let n = e.len();
    let weights = e.weights();
    let interaction = try_reduce_chunked(n, ROW_CHUNK, |rows| {
        let mut acc = KbnSum::default();
        for i in rows {
            let xi = e.position(i);
            for j in (i + 1)..n {
                let d = distance(xi, e.position(j));
                acc.add(weights[i] * weights[j] * pair_kernel_value(kernel, d, i, j)?);
            }
        }
        Ok(acc)
    })?
    .value();

    let mut conf_acc = KbnSum::default();
    for i in 0..n {
        conf_acc.add(weights[i] * conf.value(e.position(i)));
    }
    Ok(EnergyBreakdown::new(interaction, conf_acc.value()))
}

/// Velocity field `V_i = −Σ_{j≠i} m_j K′(|x_i−x_j|)(x_i−x_j)/|x_i−x_j| − ∇F(x_i)`,
/// returned flat with `dim` components per particle.
pub fn particle_velocity(
    e: &ParticleEnsemble,
    kernel: &Kernel,
    conf: &Confinement,
) -> Result<Vec<f64>> {
    check_kernel_dim(kernel, e.dim())?;
    let n = e.len();
    let dim = e.dim();
    let weights = e.weights();
    let chunks = run_chunked(n, ROW_CHUNK, |rows| -> Result<Vec<f64>> {
        let mut out = vec![0.0; rows.len() * dim];
        let mut grad = vec![0.0; dim];
        for (slot, i) in rows.enumerate() {
            let xi = e.position(i);
            let v = &mut out[slot * dim..(slot + 1) * dim];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = e.position(j);
                let d = distance(xi, xj);
                if d < MIN_SEPARATION {
                    return Err(Error::Numerical(format!(
                        "particles {i} and {j} coincide (separation {d:e}); the velocity direction is undefined"
                    )));
                }
                let coef = -weights[j] * kernel.slope(d)? / d;
                for (vd, (a, b)) in v.iter_mut().zip(xi.iter().zip(xj)) {
                    *vd += coef * (a - b);
                }
            }
            conf.gradient_into(xi, &mut grad);
            for (vd, g) in v.iter_mut().zip(&grad) {
                *vd -= g;
            }
        }
        Ok(out)
    });
    let mut flat = Vec::with_capacity(n * dim);
    for part in chunks {
        flat.extend(part?);
    }
    Ok(flat)
}

// ---------------------------------------------------------------------------
// Radial Newtonian-quadratic evaluation
// ---------------------------------------------------------------------------

/// Exact 1D reduction of `∫ K(x−y) ρ(y) dy` for a centered radial density
/// and the Newtonian-quadratic kernel `K(r) = r²/2 + r^{2−N}/(N−2)`.
///
/// The quadratic term expands to `½(m r² + ∫|y|²ρ)`; the Newtonian term
/// follows the shell theorem: interior mass acts from the origin, exterior
/// shells contribute their own potential `s^{2−N}`.
pub(crate) struct RadialPotential<'a> {
    d: &'a RadialDensity,
    /// `prefix_mass[i]`: mass strictly inside the boundary radius `r_i`.
    prefix_mass: Vec<f64>,
    /// `suffix_shell[i]`: `Σ_{k≥i} ρ_k ∫_{shell k} s^{2−N} dshell`.
    suffix_shell: Vec<f64>,
    mass: f64,
    second_moment: f64,
}

impl<'a> RadialPotential<'a> {
    pub fn new(d: &'a RadialDensity) -> Self {
        let g = d.cells();
        let n = d.dim() as f64;
        let h = d.cell_width();
        let omega = d.omega_n();
        let values = d.values();
        let weights = d.weights();

        let mut prefix_mass = Vec::with_capacity(g + 1);
        let mut acc = KbnSum::default();
        prefix_mass.push(0.0);
        for i in 0..g {
            acc.add(values[i] * weights[i]);
            prefix_mass.push(acc.value());
        }

        // ∫_{shell [a,b]} s^{2−N} dshell = ∫ s^{2−N} · Nω s^{N−1} ds
        //                                = (Nω/2)(b² − a²)
        let mut suffix_shell = vec![0.0; g + 1];
        let mut acc = KbnSum::default();
        for i in (0..g).rev() {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc.add(values[i] * 0.5 * n * omega * (b * b - a * a));
            suffix_shell[i] = acc.value();
        }

        let moments = d.moments();
        RadialPotential {
            d,
            prefix_mass,
            suffix_shell,
            mass: moments.mass,
            second_moment: moments.second_moment,
        }
    }

    /// `½ (m r² + ∫|y|²ρ)`
    pub fn quadratic_at(&self, r: f64) -> f64 {
        0.5 * (self.mass * r * r + self.second_moment)
    }

    /// `(1/(N−2)) [ r^{2−N} M_in(r) + S_out(r) ]`
    pub fn newtonian_at(&self, r: f64) -> f64 {
        let n = self.d.dim() as f64;
        let g = self.d.cells();
        let h = self.d.cell_width();
        if r <= 0.0 {
            // Interior-mass term vanishes like r² as r → 0.
            return self.suffix_shell[0] / (n - 2.0);
        }
        let j = (r / h) as usize;
        if j >= g {
            return r.powi(2 - self.d.dim() as i32) * self.prefix_mass[g] / (n - 2.0);
        }
        let a = j as f64 * h;
        let b = (j + 1) as f64 * h;
        let rho = self.d.values()[j];
        let m_in =
            self.prefix_mass[j] + rho * (self.d.ball_volume(r) - self.d.ball_volume(a));
        let s_out = rho * 0.5 * n * self.d.omega_n() * (b * b - r * r)
            + self.suffix_shell[j + 1];
        (r.powi(2 - self.d.dim() as i32) * m_in + s_out) / (n - 2.0)
    }

    pub fn total_at(&self, r: f64) -> f64 {
        self.quadratic_at(r) + self.newtonian_at(r)
    }

    /// Newtonian part at every cell center.
    pub fn newtonian_nodes(&self) -> Vec<f64> {
        (0..self.d.cells())
            .map(|i| self.newtonian_at(self.d.center(i)))
            .collect()
    }
}

fn require_newtonian_quadratic(kernel: &Kernel, dim: usize) -> Result<()> {
    let expected_p = 2.0 - dim as f64;
    match kernel {
        Kernel::PowerLaw(k)
            if (k.q() - 2.0).abs() <= 1e-12 && (k.p() - expected_p).abs() <= 1e-12 =>
        {
            Ok(())
        }
        _ => Err(Error::Unsupported(format!(
            "radial evaluation needs the Newtonian-quadratic kernel (q=2, p={expected_p} in dimension {dim}); general radial kernels are out of scope"
        ))),
    }
}

/// `∫ K(x−y) ρ(y) dy` at radius `r` for a centered radial density under the
/// Newtonian-quadratic kernel.
pub fn radial_interaction_potential(
    d: &RadialDensity,
    kernel: &Kernel,
    r: f64,
) -> Result<f64> {
    require_newtonian_quadratic(kernel, d.dim())?;
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!(
            "evaluation radius must be nonnegative, got {r}"
        )));
    }
    Ok(RadialPotential::new(d).total_at(r))
}

// ---------------------------------------------------------------------------
// Line-grid evaluation
// ---------------------------------------------------------------------------

/// Interaction part of ψ at every cell center of a line density: the
/// midpoint-rule sum `h Σ_j K(|i−j|h) ρ_j` over the Toeplitz kernel row.
///
/// Self-cell rule: the exponential kernel is bounded, so the plain midpoint
/// value `K(0)=1` applies; a power-law kernel uses the analytic cell average
/// `(1/h)∫_{−h/2}^{h/2} (|u|^q/q − |u|^p/p) du`, finite for `p > −1`.
///
/// The exponential row factorizes, `e^{−|i−j|h} = e^{−(i−j)h}` for `j ≤ i`,
/// so the same sums follow from one forward and one backward recurrence in
/// O(G); the general power-law row needs the direct O(G²) sweep.
pub(crate) fn line_interaction_nodes(d: &LineDensity, kernel: &Kernel) -> Result<Vec<f64>> {
    let g = d.cells();
    let h = d.cell_width();
    let values = d.values();

    if matches!(kernel, Kernel::Exponential) {
        let decay = (-h).exp();
        let mut out = vec![0.0; g];
        let mut acc = 0.0;
        for i in 0..g {
            acc = decay * acc + values[i];
            out[i] = acc;
        }
        let mut acc = 0.0;
        for i in (0..g).rev() {
            acc = decay * acc + values[i];
            out[i] = h * (out[i] + acc - values[i]);
        }
        return Ok(out);
    }

    let mut row = vec![0.0; g];
    row[0] = match kernel {
        Kernel::Exponential => unreachable!("handled by the recurrence path"),
        Kernel::PowerLaw(k) => {
            if k.p() <= -1.0 {
                return Err(Error::Unsupported(format!(
                    "line quadrature requires p > −1 (integrable self-cell), got p={}",
                    k.p()
                )));
            }
            let half = 0.5 * h;
            half.powf(k.q()) / (k.q() * (k.q() + 1.0))
                - half.powf(k.p()) / (k.p() * (k.p() + 1.0))
        }
    };
    for (k_idx, slot) in row.iter_mut().enumerate().skip(1) {
        *slot = kernel.value(k_idx as f64 * h)?;
    }
    let chunks = run_chunked(g, ROW_CHUNK, |rows| -> Vec<f64> {
        rows.map(|i| {
            let mut s = 0.0;
            for (j, &v) in values.iter().enumerate() {
                s += row[if i >= j { i - j } else { j - i }] * v;
            }
            h * s
        })
        .collect()
    });
    Ok(chunks.concat())
}

/// ψ of a line density at an arbitrary abscissa (plain midpoint quadrature;
/// adequate away from loaded cells).
fn line_psi_at(d: &LineDensity, kernel: &Kernel, x: f64) -> Result<f64> {
    let h = d.cell_width();
    let mut acc = KbnSum::default();
    for (j, &v) in d.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let dist = (x - d.center(j)).abs();
        let kv = if dist < MIN_SEPARATION {
            match kernel {
                Kernel::Exponential => 1.0,
                Kernel::PowerLaw(k) if k.p() > 0.0 => 0.0,
                Kernel::PowerLaw(_) => {
                    return Err(Error::Numerical(format!(
                        "ψ evaluation point {x} coincides with a loaded cell center under a singular kernel"
                    )))
                }
            }
        } else {
            kernel.value(dist)?
        };
        acc.add(h * v * kv);
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// ψ field and density energies
// ---------------------------------------------------------------------------

/// Evaluates `ψ(x) = ∫ K(x−y) dρ(y) + F(x)` at the given points.
///
/// Points carry either the state's full dimension or a single coordinate,
/// which radial states read as a radius and line states as an abscissa.
pub fn psi_field(
    state: &State,
    kernel: &Kernel,
    conf: &Confinement,
    points: &[Vec<f64>],
) -> Result<PsiField> {
    check_kernel_dim(kernel, state.dim())?;
    let values = match state {
        State::Particles(e) => {
            let weights = e.weights();
            let mut out = Vec::with_capacity(points.len());
            for pt in points {
                if pt.len() != e.dim() {
                    return Err(Error::Config(format!(
                        "ψ point has {} coordinates, ensemble dimension is {}",
                        pt.len(),
                        e.dim()
                    )));
                }
                let mut acc = KbnSum::default();
                for j in 0..e.len() {
                    let d = distance(pt, e.position(j));
                    if d < MIN_SEPARATION && kernel.is_singular() {
                        return Err(Error::Numerical(format!(
                            "ψ evaluation point coincides with particle {j} under a singular kernel"
                        )));
                    }
                    acc.add(weights[j] * pair_kernel_value(kernel, d, usize::MAX, j)?);
                }
                out.push(acc.value() + conf.value(pt));
            }
            out
        }
        State::Radial(d) => {
            require_newtonian_quadratic(kernel, d.dim())?;
            let pot = RadialPotential::new(d);
            let mut out = Vec::with_capacity(points.len());
            for pt in points {
                let r = point_radius(pt, d.dim())?;
                out.push(pot.total_at(r) + conf.value_at_radius_sq(r * r));
            }
            out
        }
        State::Line(d) => {
            let mut out = Vec::with_capacity(points.len());
            for pt in points {
                if pt.len() != 1 {
                    return Err(Error::Config(format!(
                        "line ψ points take one coordinate, got {}",
                        pt.len()
                    )));
                }
                let x = pt[0];
                out.push(line_psi_at(d, kernel, x)? + conf.value_at_radius_sq(x * x));
            }
            out
        }
    };
    Ok(PsiField {
        points: points.to_vec(),
        values,
    })
}

fn point_radius(pt: &[f64], dim: usize) -> Result<f64> {
    if pt.len() == 1 {
        if pt[0] < 0.0 {
            return Err(Error::Domain(format!(
                "radius coordinate must be nonnegative, got {}",
                pt[0]
            )));
        }
        Ok(pt[0])
    } else if pt.len() == dim {
        Ok(pt.iter().map(|c| c * c).sum::<f64>().sqrt())
    } else {
        Err(Error::Config(format!(
            "ψ point has {} coordinates, expected 1 (radius) or {dim}",
            pt.len()
        )))
    }
}

/// Interaction part of ψ at every node of a grid density.
pub(crate) fn interaction_psi_nodes(state: &State, kernel: &Kernel) -> Result<Vec<f64>> {
    match state {
        State::Radial(d) => {
            require_newtonian_quadratic(kernel, d.dim())?;
            let pot = RadialPotential::new(d);
            Ok((0..d.cells()).map(|i| pot.total_at(d.center(i))).collect())
        }
        State::Line(d) => line_interaction_nodes(d, kernel),
        State::Particles(_) => Err(Error::Unsupported(
            "interaction node field is defined for grid densities".into(),
        )),
    }
}

/// Confinement values at every node of a grid density.
pub(crate) fn confinement_nodes(state: &State, conf: &Confinement) -> Vec<f64> {
    match state {
        State::Radial(d) => (0..d.cells())
            .map(|i| {
                let r = d.center(i);
                conf.value_at_radius_sq(r * r)
            })
            .collect(),
        State::Line(d) => (0..d.cells())
            .map(|i| {
                let x = d.center(i);
                conf.value_at_radius_sq(x * x)
            })
            .collect(),
        State::Particles(e) => (0..e.len()).map(|i| conf.value(e.position(i))).collect(),
    }
}

/// Energy of a grid density:
/// `½ Σ_i w_i ρ_i ψ_K(x_i) + Σ_i w_i ρ_i F(x_i)`.
pub fn density_energy(
    state: &State,
    kernel: &Kernel,
    conf: &Confinement,
) -> Result<EnergyBreakdown> {
    let psi_k = interaction_psi_nodes(state, kernel)?;
    Ok(density_energy_with_field(state, conf, &psi_k))
}

/// Same as [`density_energy`] with a precomputed interaction field, so
/// descent loops can reuse the expensive convolution.
pub(crate) fn density_energy_with_field(
    state: &State,
    conf: &Confinement,
    psi_k: &[f64],
) -> EnergyBreakdown {
    let node_masses = state.node_masses();
    let conf_vals = confinement_nodes(state, conf);
    let mut interaction = KbnSum::default();
    let mut confinement = KbnSum::default();
    for i in 0..node_masses.len() {
        interaction.add(0.5 * node_masses[i] * psi_k[i]);
        confinement.add(node_masses[i] * conf_vals[i]);
    }
    EnergyBreakdown::new(interaction.value(), confinement.value())
}

/// Energy of any state under its natural quadrature.
pub fn state_energy(state: &State, kernel: &Kernel, conf: &Confinement) -> Result<EnergyBreakdown> {
    match state {
        State::Particles(e) => particle_energy(e, kernel, conf),
        State::Radial(_) | State::Line(_) => density_energy(state, kernel, conf),
    }
}

// ---------------------------------------------------------------------------
// Negative-Sobolev decomposition
// ---------------------------------------------------------------------------

/// Squared H⁻¹-type norm
/// `∬ ρ(x)ρ(y) / (N(N−2)ω_N |x−y|^{N−2}) dx dy` of a radial density.
pub fn h_minus1_norm_sq(d: &RadialDensity) -> Result<f64> {
    let pot = RadialPotential::new(d);
    let newton = pot.newtonian_nodes();
    let weights = d.weights();
    let values = d.values();
    let mut acc = KbnSum::default();
    for i in 0..d.cells() {
        acc.add(values[i] * weights[i] * newton[i]);
    }
    let n = d.dim() as f64;
    Ok(acc.value() / (n * d.omega_n()))
}

/// Splits the Newtonian-quadratic energy of a centered radial density into
/// `(m/2)∫|x|²ρ + β∫|x|²ρ + (Nω_N/2)‖ρ‖²_{H⁻¹}`.
pub fn energy_decomposition(d: &RadialDensity, beta: f64) -> Result<EnergyDecomposition> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Config(format!(
            "confinement strength must be nonnegative, got {beta}"
        )));
    }
    let moments = d.moments();
    let n = d.dim() as f64;
    let quad_moment_part = 0.5 * moments.mass * moments.second_moment;
    let confinement_part = beta * moments.second_moment;
    let h1_part = 0.5 * n * d.omega_n() * h_minus1_norm_sq(d)?;
    Ok(EnergyDecomposition {
        quad_moment_part,
        confinement_part,
        h1_part,
        total: quad_moment_part + confinement_part + h1_part,
    })
}

// ---------------------------------------------------------------------------
// Hardy–Littlewood–Sobolev diagnostics
// ---------------------------------------------------------------------------

/// Evaluates `∬|x−y|^γ ρρ` against the sharp-constant norm bound and the
/// capped-class interpolation bound.
///
/// Radial quadrature uses the closed-form angular average of `|x−y|^γ`,
/// available for N = 3 and γ ∈ (−2, 0); line grids need γ ∈ (−1, 0) for an
/// integrable self-cell.
pub fn hls_check(state: &State, gamma: f64) -> Result<HlsCheck> {
    let (lhs, norm, cap, mass, dim) = match state {
        State::Radial(d) => {
            let n = d.dim();
            let nf = n as f64;
            if !(gamma > -nf && gamma < 0.0) {
                return Err(Error::Domain(format!(
                    "interaction exponent gamma={gamma} must lie in (−{n}, 0)"
                )));
            }
            if n != 3 {
                return Err(Error::Unsupported(format!(
                    "radial pair quadrature uses the N = 3 angular average, got N = {n}"
                )));
            }
            if gamma <= -2.0 {
                return Err(Error::Unsupported(format!(
                    "radial pair quadrature needs gamma > −2 for an integrable diagonal, got {gamma}"
                )));
            }
            let lhs = radial_pair_integral(d, gamma);
            let s = 2.0 * nf / (2.0 * nf + gamma);
            (lhs, lp_norm_grid(d.values(), d.weights(), s), d.cap(), d.mass(), n)
        }
        State::Line(d) => {
            if !(gamma > -1.0 && gamma < 0.0) {
                return Err(Error::Domain(format!(
                    "interaction exponent gamma={gamma} must lie in (−1, 0) on the line"
                )));
            }
            let lhs = line_pair_integral(d, gamma);
            let s = 2.0 / (2.0 + gamma);
            let h = d.cell_width();
            let weights = vec![h; d.cells()];
            (lhs, lp_norm_grid(d.values(), &weights, s), d.cap(), d.mass(), 1)
        }
        State::Particles(_) => {
            return Err(Error::Unsupported(
                "the HLS diagnostic applies to grid densities".into(),
            ))
        }
    };
    let nf = dim as f64;
    let c = hls_sharp_constant(gamma, dim)?;
    let norm_bound = c * norm * norm;
    let interp_bound = c * cap.powf(-gamma / nf) * mass.powf((2.0 * nf + gamma) / nf);
    let tol = 1e-9;
    let ok = lhs <= norm_bound * (1.0 + tol) + tol
        && norm_bound <= interp_bound * (1.0 + tol) + tol;
    Ok(HlsCheck {
        lhs,
        norm_bound,
        interp_bound,
        ok,
    })
}

/// `(Σ w_i ρ_i^s)^{1/s}`
fn lp_norm_grid(values: &[f64], weights: &[f64], s: f64) -> f64 {
    let mut acc = KbnSum::default();
    for (v, w) in values.iter().zip(weights) {
        if *v > 0.0 {
            acc.add(w * v.powf(s));
        }
    }
    acc.value().powf(1.0 / s)
}

/// `∬|x−y|^γ ρρ` for a radial density in R³. The angular average of
/// `|x−y|^γ` over a sphere of radius `s` seen from radius `r` is
/// `[(r+s)^{γ+2} − |r−s|^{γ+2}] / (2 r s (γ+2))`.
fn radial_pair_integral(d: &RadialDensity, gamma: f64) -> f64 {
    let g = d.cells();
    let values = d.values();
    let weights = d.weights();
    let e = gamma + 2.0;
    reduce_chunked(g, ROW_CHUNK, |rows| {
        let mut acc = KbnSum::default();
        for i in rows {
            if values[i] == 0.0 {
                continue;
            }
            let r = d.center(i);
            for j in 0..g {
                if values[j] == 0.0 {
                    continue;
                }
                let s = d.center(j);
                let avg =
                    ((r + s).powf(e) - (r - s).abs().powf(e)) / (2.0 * r * s * e);
                acc.add(values[i] * weights[i] * values[j] * weights[j] * avg);
            }
        }
        acc
    })
    .value()
}

/// `∬|x−y|^γ ρρ` on the line, with the exact same-cell double average
/// `2h^γ/((γ+1)(γ+2))` on the diagonal.
fn line_pair_integral(d: &LineDensity, gamma: f64) -> f64 {
    let g = d.cells();
    let h = d.cell_width();
    let values = d.values();
    let diag = 2.0 * h.powf(gamma) / ((gamma + 1.0) * (gamma + 2.0));
    reduce_chunked(g, ROW_CHUNK, |rows| {
        let mut acc = KbnSum::default();
        for i in rows {
            if values[i] == 0.0 {
                continue;
            }
            for j in 0..g {
                if values[j] == 0.0 {
                    continue;
                }
                let kv = if i == j {
                    diag
                } else {
                    (h * (i as f64 - j as f64).abs()).powf(gamma)
                };
                acc.add(values[i] * values[j] * h * h * kv);
            }
        }
        acc
    })
    .value()
}
