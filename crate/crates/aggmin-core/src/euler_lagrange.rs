//! First-order optimality checks: the generated potential `ψ = K∗ρ + F`
//! must be constant on the support of a minimizer and no smaller off it.
//! The verifier measures both defects against the mass-weighted multiplier
//! `c₀ = ∫ψ ρ / m`.

use crate::discretization::State;
use crate::energy::{
    confinement_nodes, distance, interaction_psi_nodes, pair_kernel_value, psi_field, PsiField,
};
use crate::numerics::KbnSum;
use crate::potentials::{Confinement, Kernel};
use crate::{Error, Result};

/// Outcome of the optimality check. `off_support_min` is the smallest excess
/// `ψ − c₀` over the complement of the support; it is `+∞` when the support
/// covers every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ElReport {
    pub c0: f64,
    pub on_support_sup: f64,
    pub off_support_min: f64,
    pub support_threshold: f64,
    pub tol_abs: f64,
    pub pass: bool,
}

/// Mass-weighted average of a potential sampled at the state's nodes:
/// `c₀ = Σ_i m_i ψ_i / m`.
pub fn multiplier_c0(state: &State, psi: &PsiField) -> Result<f64> {
    let node_masses = state.node_masses();
    if psi.values.len() != node_masses.len() {
        return Err(Error::Config(format!(
            "potential sampled at {} points but the state has {} nodes",
            psi.values.len(),
            node_masses.len()
        )));
    }
    let mass = state.mass();
    if mass <= 0.0 {
        return Err(Error::Domain(
            "multiplier of a massless state is undefined".into(),
        ));
    }
    let mut acc = KbnSum::default();
    for (w, p) in node_masses.iter().zip(&psi.values) {
        acc.add(w * p);
    }
    Ok(acc.value() / mass)
}

/// Leave-one-out potential at each particle:
/// `ψ_i = Σ_{j≠i} m_j K(|x_i−x_j|) + F(x_i)`.
fn particle_psi_values(
    positions: &[Vec<f64>],
    weights: &[f64],
    kernel: &Kernel,
    conf: &Confinement,
) -> Result<Vec<f64>> {
    let n = positions.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = KbnSum::default();
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = distance(&positions[i], &positions[j]);
            acc.add(weights[j] * pair_kernel_value(kernel, d, i, j)?);
        }
        out.push(acc.value() + conf.value(&positions[i]));
    }
    Ok(out)
}

/// Potential `ψ = K∗ρ + F` at each node of the state: cell centers for
/// grids, leave-one-out sums at the particles of an ensemble.
pub fn node_potentials(
    state: &State,
    kernel: &Kernel,
    conf: &Confinement,
) -> Result<Vec<f64>> {
    match state {
        State::Particles(e) => {
            let positions: Vec<Vec<f64>> =
                (0..e.len()).map(|i| e.position(i).to_vec()).collect();
            particle_psi_values(&positions, e.weights(), kernel, conf)
        }
        State::Radial(_) | State::Line(_) => {
            let mut psi = interaction_psi_nodes(state, kernel)?;
            for (p, f) in psi.iter_mut().zip(confinement_nodes(state, conf)) {
                *p += f;
            }
            Ok(psi)
        }
    }
}

/// Checks the stationarity conditions of a candidate minimizer.
///
/// On grids the support is the set of cells with `ρ ≥ threshold · max ρ`;
/// off-support cells are probed at their centers and at a twice-refined set
/// of interior points. Particle ensembles carry their whole mass on the
/// nodes, so the off-support side is vacuous there.
///
/// `support_threshold` defaults to `1e−3`, `tol_abs` to `1e−3 · |c₀|`.
pub fn el_verify(
    state: &State,
    kernel: &Kernel,
    conf: &Confinement,
    support_threshold: Option<f64>,
    tol_abs: Option<f64>,
) -> Result<ElReport> {
    let threshold = support_threshold.unwrap_or(1e-3);
    if !(threshold.is_finite() && threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!(
            "support threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if let Some(t) = tol_abs {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }

    let mass = state.mass();
    if mass <= 0.0 {
        return Err(Error::Domain(
            "optimality of a massless state is undefined".into(),
        ));
    }

    let node_psi = node_potentials(state, kernel, conf)?;
    let off_probe_psi = match state {
        State::Particles(_) => Vec::new(),
        State::Radial(_) | State::Line(_) => {
            let probes = off_support_probes(state, threshold);
            if probes.is_empty() {
                Vec::new()
            } else {
                psi_field(state, kernel, conf, &probes)?.values
            }
        }
    };

    let c0 = {
        let node_masses = state.node_masses();
        let mut acc = KbnSum::default();
        for (w, p) in node_masses.iter().zip(&node_psi) {
            acc.add(w * p);
        }
        acc.value() / mass
    };
    let tol = tol_abs.unwrap_or(1e-3 * c0.abs());

    let support = support_mask(state, threshold);
    let mut on_sup: f64 = 0.0;
    let mut off_min = f64::INFINITY;
    for (i, p) in node_psi.iter().enumerate() {
        if support[i] {
            on_sup = on_sup.max((p - c0).abs());
        } else {
            off_min = off_min.min(p - c0);
        }
    }
    for p in &off_probe_psi {
        off_min = off_min.min(p - c0);
    }

    let pass = on_sup <= tol && off_min >= -tol;
    Ok(ElReport {
        c0,
        on_support_sup: on_sup,
        off_support_min: off_min,
        support_threshold: threshold,
        tol_abs: tol,
        pass,
    })
}

/// True at nodes carrying the support: grid cells at or above the relative
/// threshold, every particle of an ensemble.
fn support_mask(state: &State, threshold: f64) -> Vec<bool> {
    match state {
        State::Particles(e) => vec![true; e.len()],
        State::Radial(d) => {
            let peak = d.values().iter().cloned().fold(0.0, f64::max);
            d.values().iter().map(|v| *v >= threshold * peak).collect()
        }
        State::Line(d) => {
            let peak = d.values().iter().cloned().fold(0.0, f64::max);
            d.values().iter().map(|v| *v >= threshold * peak).collect()
        }
    }
}

/// Probe coordinates inside off-support cells: each contributes its two
/// quarter-width interior points, doubling the sampling density beyond the
/// node centers.
fn off_support_probes(state: &State, threshold: f64) -> Vec<Vec<f64>> {
    let support = support_mask(state, threshold);
    let mut probes = Vec::new();
    match state {
        State::Particles(_) => {}
        State::Radial(d) => {
            let h = d.cell_width();
            for i in 0..d.cells() {
                if !support[i] {
                    let c = d.center(i);
                    probes.push(vec![c - 0.25 * h]);
                    probes.push(vec![c + 0.25 * h]);
                }
            }
        }
        State::Line(d) => {
            let h = d.cell_width();
            for i in 0..d.cells() {
                if !support[i] {
                    let c = d.center(i);
                    probes.push(vec![c - 0.25 * h]);
                    probes.push(vec![c + 0.25 * h]);
                }
            }
        }
    }
    probes
}
