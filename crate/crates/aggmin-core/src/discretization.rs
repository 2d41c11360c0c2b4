//! State representations: weighted particle ensembles, radially symmetric
//! densities on shell grids (dimension N > 2), and densities on a symmetric
//! interval (the one-dimensional case), together with their moments and
//! support/concentration diagnostics.

use crate::numerics::{compensated_sum, unit_ball_volume, KbnSum, SeededRng};
use crate::{Error, Result};

/// Mass, center of mass, and second moment `∫|x|² ρ` about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub center: Vec<f64>,
    pub second_moment: f64,
}

// ---------------------------------------------------------------------------
// Particle ensembles
// ---------------------------------------------------------------------------

/// Finite collection of point masses in `R^N`. Positions are stored flat,
/// `N` coordinates per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("particle dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::Config("ensemble needs at least one particle".into()));
        }
        if positions.len() != dim * weights.len() {
            return Err(Error::Config(format!(
                "{} coordinates do not match {} particles in dimension {}",
                positions.len(),
                weights.len(),
                dim
            )));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite coordinate at flat index {i}"
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config(format!(
                "particle weight {} at index {i} must be positive",
                weights[i]
            )));
        }
        Ok(ParticleEnsemble {
            dim,
            positions,
            weights,
        })
    }

    /// Draws `count` equal-weight particles i.i.d. uniformly from
    /// `B(center, radius)`, carrying `total_mass` in all.
    pub fn sample_uniform_ball(
        rng: &mut SeededRng,
        count: usize,
        radius: f64,
        center: &[f64],
        total_mass: f64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("particle count must be positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!(
                "sampling radius must be positive, got {radius}"
            )));
        }
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(Error::Config(format!(
                "total mass must be positive, got {total_mass}"
            )));
        }
        let dim = center.len();
        let mut positions = Vec::with_capacity(count * dim);
        for _ in 0..count {
            let unit = rng.sample_unit_ball(dim);
            for (c, u) in center.iter().zip(unit) {
                positions.push(c + radius * u);
            }
        }
        let weights = vec![total_mass / count as f64; count];
        Self::new(dim, positions, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Replaces all positions, keeping weights and dimension.
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, positions, self.weights.clone())
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(&self.weights).expect("weights are finite by construction")
    }

    pub fn moments(&self) -> Moments {
        let mass = self.mass();
        let mut center_acc = vec![KbnSum::default(); self.dim];
        let mut second = KbnSum::default();
        for i in 0..self.len() {
            let w = self.weights[i];
            let x = self.position(i);
            let mut r2 = 0.0;
            for (d, &c) in x.iter().enumerate() {
                center_acc[d].add(w * c);
                r2 += c * c;
            }
            second.add(w * r2);
        }
        let center = center_acc
            .iter()
            .map(|a| if mass > 0.0 { a.value() / mass } else { 0.0 })
            .collect();
        Moments {
            mass,
            center,
            second_moment: second.value(),
        }
    }

    /// Largest mass contained in a ball `B(y, radius)` over candidate
    /// centers `y`.
    pub fn concentration_mass(&self, radius: f64, centers: &[Vec<f64>]) -> Result<f64> {
        check_concentration_args(radius, centers, self.dim)?;
        let r2 = radius * radius;
        let mut best = f64::NEG_INFINITY;
        for y in centers {
            let mut acc = KbnSum::default();
            for i in 0..self.len() {
                let d2: f64 = self
                    .position(i)
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 <= r2 {
                    acc.add(self.weights[i]);
                }
            }
            best = best.max(acc.value());
        }
        Ok(best)
    }
}

fn check_concentration_args(radius: f64, centers: &[Vec<f64>], dim: usize) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!(
            "concentration radius must be positive, got {radius}"
        )));
    }
    if centers.is_empty() {
        return Err(Error::Domain(
            "concentration needs at least one candidate center".into(),
        ));
    }
    if let Some(y) = centers.iter().find(|y| y.len() != dim) {
        return Err(Error::Config(format!(
            "candidate center has {} coordinates, state dimension is {dim}",
            y.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Radial densities
// ---------------------------------------------------------------------------

/// Radially symmetric density on `G` uniform shells covering `[0, rmax]` in
/// dimension `N > 2`, collocated at cell centers and capped at `M`.
///
/// The quadrature weight of cell `i` is the exact shell volume
/// `ω_N(r_{i+1}^N − r_i^N)`, so piecewise-constant densities integrate
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    dim: usize,
    rmax: f64,
    values: Vec<f64>,
    cap: f64,
    weights: Vec<f64>,
    omega_n: f64,
}

impl RadialDensity {
    pub fn new(dim: usize, rmax: f64, values: Vec<f64>, cap: f64) -> Result<Self> {
        if dim <= 2 {
            return Err(Error::Config(format!(
                "radial grids require dimension N > 2, got {dim}"
            )));
        }
        if !(rmax.is_finite() && rmax > 0.0) {
            return Err(Error::Config(format!("rmax must be positive, got {rmax}")));
        }
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::Config(format!("cap must be positive, got {cap}")));
        }
        if values.is_empty() {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > cap)
        {
            return Err(Error::Config(format!(
                "density value {} at cell {i} is outside [0, {cap}]",
                values[i]
            )));
        }
        let omega_n = unit_ball_volume(dim);
        let g = values.len();
        let h = rmax / g as f64;
        let boundary_volume =
            |i: usize| omega_n * (i as f64 * h).powi(dim as i32);
        let weights = (0..g)
            .map(|i| boundary_volume(i + 1) - boundary_volume(i))
            .collect();
        Ok(RadialDensity {
            dim,
            rmax,
            values,
            cap,
            weights,
            omega_n,
        })
    }

    /// Constant density carrying `mass`, clipped only by feasibility checks.
    pub fn constant_with_mass(
        dim: usize,
        rmax: f64,
        cells: usize,
        cap: f64,
        mass: f64,
    ) -> Result<Self> {
        let omega_n = unit_ball_volume(dim);
        let level = mass / (omega_n * rmax.powi(dim as i32));
        if level > cap {
            return Err(Error::Config(format!(
                "constant level {level} needed for mass {mass} exceeds cap {cap}"
            )));
        }
        Self::new(dim, rmax, vec![level; cells], cap)
    }

    /// Indicator of `B(0, ball_radius)` at the given height, with the
    /// boundary cell scaled by its covered volume fraction so the total mass
    /// is exact.
    pub fn ball_indicator(
        dim: usize,
        rmax: f64,
        cells: usize,
        cap: f64,
        ball_radius: f64,
        height: f64,
    ) -> Result<Self> {
        if !(ball_radius > 0.0 && ball_radius < rmax) {
            return Err(Error::Config(format!(
                "ball radius {ball_radius} must lie inside (0, rmax={rmax})"
            )));
        }
        if !(height > 0.0 && height <= cap) {
            return Err(Error::Config(format!(
                "indicator height {height} must lie in (0, cap={cap}]"
            )));
        }
        let omega_n = unit_ball_volume(dim);
        let h = rmax / cells as f64;
        let vol = |r: f64| omega_n * r.powi(dim as i32);
        let values = (0..cells)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                if b <= ball_radius {
                    height
                } else if a >= ball_radius {
                    0.0
                } else {
                    height * (vol(ball_radius) - vol(a)) / (vol(b) - vol(a))
                }
            })
            .collect();
        Self::new(dim, rmax, values, cap)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn cell_width(&self) -> f64 {
        self.rmax / self.cells() as f64
    }

    /// Cell-center radius of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.cell_width()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Shell-volume quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn omega_n(&self) -> f64 {
        self.omega_n
    }

    /// Volume of `B(0, r)` in the grid's dimension.
    pub(crate) fn ball_volume(&self, r: f64) -> f64 {
        self.omega_n * r.powi(self.dim as i32)
    }

    /// Same grid with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.rmax, values, self.cap)
    }

    /// Same grid carrying a signed field (an iterate difference, not a
    /// density); skips the `[0, cap]` range check.
    pub(crate) fn with_values_signed(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Config(format!(
                "{} values do not match {} grid cells",
                values.len(),
                self.values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(RadialDensity {
            dim: self.dim,
            rmax: self.rmax,
            values,
            cap: self.cap,
            weights: self.weights.clone(),
            omega_n: self.omega_n,
        })
    }

    pub fn mass(&self) -> f64 {
        let prods: Vec<f64> = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        compensated_sum(&prods).expect("finite by construction")
    }

    pub fn moments(&self) -> Moments {
        let mut mass = KbnSum::default();
        let mut second = KbnSum::default();
        for i in 0..self.cells() {
            let cell_mass = self.values[i] * self.weights[i];
            mass.add(cell_mass);
            let r = self.center(i);
            second.add(cell_mass * r * r);
        }
        Moments {
            mass: mass.value(),
            center: vec![0.0; self.dim],
            second_moment: second.value(),
        }
    }

    /// Largest mass inside `B(y, radius)` over candidate centers. Off-origin
    /// centers use the spherical-cap overlap fraction at each cell center,
    /// which is available in closed form only for N = 3.
    pub fn concentration_mass(&self, radius: f64, centers: &[Vec<f64>]) -> Result<f64> {
        check_concentration_args(radius, centers, self.dim)?;
        let mut best = f64::NEG_INFINITY;
        for y in centers {
            let d2: f64 = y.iter().map(|c| c * c).sum();
            let d = d2.sqrt();
            let m = if d < 1e-14 * self.rmax.max(1.0) {
                // Exact shell/ball overlap for a concentric ball.
                let mut acc = KbnSum::default();
                let h = self.cell_width();
                for i in 0..self.cells() {
                    let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                    if a >= radius {
                        break;
                    }
                    let inside = self.ball_volume(b.min(radius)) - self.ball_volume(a);
                    acc.add(self.values[i] * inside);
                }
                acc.value()
            } else if self.dim == 3 {
                // Midpoint rule with the cap-area fraction of each sphere.
                let mut acc = KbnSum::default();
                for i in 0..self.cells() {
                    let s = self.center(i);
                    let frac = if s + d <= radius {
                        1.0
                    } else if (s - d).abs() >= radius {
                        0.0
                    } else {
                        let cos_theta = (s * s + d * d - radius * radius) / (2.0 * s * d);
                        0.5 * (1.0 - cos_theta)
                    };
                    acc.add(self.values[i] * self.weights[i] * frac);
                }
                acc.value()
            } else {
                return Err(Error::Unsupported(format!(
                    "off-origin concentration centers are only implemented for N = 3, got N = {}",
                    self.dim
                )));
            };
            best = best.max(m);
        }
        Ok(best)
    }

    pub fn support_radius(&self, threshold: f64) -> Result<f64> {
        support_radius_impl(threshold, &self.values, |i| self.center(i))
    }
}

// ---------------------------------------------------------------------------
// Line densities
// ---------------------------------------------------------------------------

/// Density on `G` uniform cells covering the symmetric interval
/// `[−halfwidth, halfwidth]`, capped at `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDensity {
    halfwidth: f64,
    values: Vec<f64>,
    cap: f64,
}

impl LineDensity {
    pub fn new(halfwidth: f64, values: Vec<f64>, cap: f64) -> Result<Self> {
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::Config(format!(
                "half-width must be positive, got {halfwidth}"
            )));
        }
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::Config(format!("cap must be positive, got {cap}")));
        }
        if values.is_empty() {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > cap)
        {
            return Err(Error::Config(format!(
                "density value {} at cell {i} is outside [0, {cap}]",
                values[i]
            )));
        }
        Ok(LineDensity {
            halfwidth,
            values,
            cap,
        })
    }

    pub fn constant_with_mass(
        halfwidth: f64,
        cells: usize,
        cap: f64,
        mass: f64,
    ) -> Result<Self> {
        let level = mass / (2.0 * halfwidth);
        if level > cap {
            return Err(Error::Config(format!(
                "constant level {level} needed for mass {mass} exceeds cap {cap}"
            )));
        }
        Self::new(halfwidth, vec![level; cells], cap)
    }

    /// Indicator of `[−half_support, half_support]` at the given height, with
    /// partially covered cells scaled by their overlap fraction.
    pub fn interval_indicator(
        halfwidth: f64,
        cells: usize,
        cap: f64,
        half_support: f64,
        height: f64,
    ) -> Result<Self> {
        if !(half_support > 0.0 && half_support < halfwidth) {
            return Err(Error::Config(format!(
                "half-support {half_support} must lie inside (0, halfwidth={halfwidth})"
            )));
        }
        if !(height > 0.0 && height <= cap) {
            return Err(Error::Config(format!(
                "indicator height {height} must lie in (0, cap={cap}]"
            )));
        }
        let h = 2.0 * halfwidth / cells as f64;
        let values = (0..cells)
            .map(|i| {
                let a = -halfwidth + i as f64 * h;
                let b = a + h;
                let overlap = (b.min(half_support) - a.max(-half_support)).max(0.0);
                height * overlap / h
            })
            .collect();
        Self::new(halfwidth, values, cap)
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.halfwidth / self.cells() as f64
    }

    /// Cell-center abscissa of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        -self.halfwidth + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.halfwidth, values, self.cap)
    }

    /// Same grid carrying a signed field (an iterate difference, not a
    /// density); skips the `[0, cap]` range check.
    pub(crate) fn with_values_signed(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Config(format!(
                "{} values do not match {} grid cells",
                values.len(),
                self.values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(LineDensity {
            halfwidth: self.halfwidth,
            values,
            cap: self.cap,
        })
    }

    pub fn mass(&self) -> f64 {
        let h = self.cell_width();
        let prods: Vec<f64> = self.values.iter().map(|v| v * h).collect();
        compensated_sum(&prods).expect("finite by construction")
    }

    pub fn moments(&self) -> Moments {
        let h = self.cell_width();
        let mut mass = KbnSum::default();
        let mut first = KbnSum::default();
        let mut second = KbnSum::default();
        for i in 0..self.cells() {
            let cell_mass = self.values[i] * h;
            let x = self.center(i);
            mass.add(cell_mass);
            first.add(cell_mass * x);
            second.add(cell_mass * x * x);
        }
        let m = mass.value();
        Moments {
            mass: m,
            center: vec![if m > 0.0 { first.value() / m } else { 0.0 }],
            second_moment: second.value(),
        }
    }

    pub fn concentration_mass(&self, radius: f64, centers: &[Vec<f64>]) -> Result<f64> {
        check_concentration_args(radius, centers, 1)?;
        let h = self.cell_width();
        let mut best = f64::NEG_INFINITY;
        for y in centers {
            let y = y[0];
            let mut acc = KbnSum::default();
            for i in 0..self.cells() {
                let a = -self.halfwidth + i as f64 * h;
                let b = a + h;
                let overlap = (b.min(y + radius) - a.max(y - radius)).max(0.0);
                acc.add(self.values[i] * overlap);
            }
            best = best.max(acc.value());
        }
        Ok(best)
    }

    pub fn support_radius(&self, threshold: f64) -> Result<f64> {
        support_radius_impl(threshold, &self.values, |i| self.center(i).abs())
    }
}

fn support_radius_impl<F: Fn(usize) -> f64>(
    threshold: f64,
    values: &[f64],
    coord: F,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!(
            "support threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::Domain("density has empty support".into()));
    }
    let cut = threshold * max;
    let mut radius: Option<f64> = None;
    for (i, &v) in values.iter().enumerate() {
        if v >= cut {
            let r = coord(i);
            radius = Some(radius.map_or(r, |best: f64| best.max(r)));
        }
    }
    Ok(radius.expect("a maximal cell always reaches the threshold"))
}

// ---------------------------------------------------------------------------
// Unified state
// ---------------------------------------------------------------------------

/// Any of the three supported state representations.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Particles(ParticleEnsemble),
    Radial(RadialDensity),
    Line(LineDensity),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Particles(e) => e.dim(),
            State::Radial(d) => d.dim(),
            State::Line(_) => 1,
        }
    }

    /// Number of nodes (particles or grid cells).
    pub fn node_count(&self) -> usize {
        match self {
            State::Particles(e) => e.len(),
            State::Radial(d) => d.cells(),
            State::Line(d) => d.cells(),
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            State::Particles(e) => e.mass(),
            State::Radial(d) => d.mass(),
            State::Line(d) => d.mass(),
        }
    }

    pub fn moments(&self) -> Moments {
        match self {
            State::Particles(e) => e.moments(),
            State::Radial(d) => d.moments(),
            State::Line(d) => d.moments(),
        }
    }

    pub fn concentration_mass(&self, radius: f64, centers: &[Vec<f64>]) -> Result<f64> {
        match self {
            State::Particles(e) => e.concentration_mass(radius, centers),
            State::Radial(d) => d.concentration_mass(radius, centers),
            State::Line(d) => d.concentration_mass(radius, centers),
        }
    }

    /// Per-node mass charges: particle weights, or `ρ_i w_i` on grids.
    pub(crate) fn node_masses(&self) -> Vec<f64> {
        match self {
            State::Particles(e) => e.weights().to_vec(),
            State::Radial(d) => d
                .values()
                .iter()
                .zip(d.weights())
                .map(|(v, w)| v * w)
                .collect(),
            State::Line(d) => {
                let h = d.cell_width();
                d.values().iter().map(|v| v * h).collect()
            }
        }
    }
}
