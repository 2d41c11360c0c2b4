//! Closed-form reference solutions used as oracles: the uniform-ball
//! minimizer for the quadratic-attraction Newtonian-repulsion energy, the
//! compactly supported parabola-like profile for the exponential kernel on
//! the line, and the symmetric two-particle equilibrium.

use crate::discretization::{LineDensity, RadialDensity};
use crate::numerics::unit_ball_volume;
use crate::{Error, Result};

fn check_ball_params(n: usize, m: f64, beta: f64) -> Result<()> {
    if n <= 2 {
        return Err(Error::Domain(format!(
            "the uniform-ball solution needs dimension N > 2, got {n}"
        )));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Domain(format!(
            "confinement strength must be nonnegative, got {beta}"
        )));
    }
    Ok(())
}

/// The uniform ball `ρ₀ = height · 1_{B(0, r0)}` minimizing
/// `½∬K ρρ + β∫|x|²ρ` with `K(r) = r²/2 + r^{2−N}/(N−2)` at mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSolution {
    pub n: usize,
    pub m: f64,
    pub beta: f64,
    pub r0: f64,
    pub height: f64,
    pub c0: f64,
}

impl BallSolution {
    /// Second moment `∫|x|²ρ₀ = m · N/(N+2) · r0²`.
    pub fn second_moment(&self) -> f64 {
        let n = self.n as f64;
        self.m * n / (n + 2.0) * self.r0 * self.r0
    }

    /// Total energy of the solution.
    pub fn energy(&self) -> f64 {
        0.5 * (self.m * self.c0 + self.beta * self.second_moment())
    }

    /// Deposits the profile on a radial grid, with the boundary cell holding
    /// exactly the sliver of ball volume it covers so the grid mass equals
    /// `m` to rounding.
    pub fn inject_radial(&self, cells: usize, rmax: f64, cap: f64) -> Result<RadialDensity> {
        if rmax <= self.r0 {
            return Err(Error::Config(format!(
                "grid extent {rmax} must exceed the support radius {}",
                self.r0
            )));
        }
        if cap < self.height {
            return Err(Error::Config(format!(
                "cap {cap} sits below the profile height {}",
                self.height
            )));
        }
        RadialDensity::ball_indicator(self.n, rmax, cells, cap, self.r0, self.height)
    }
}

/// Solves the uniform-ball problem in dimension `n > 2`:
/// `r0 = (m/(m+2β))^{1/N}`, `height = (m+2β)/ω_N`, and the multiplier
/// `c0 = N(m+2β)/(2(N+2)) · r0^{N+2} + N(m+2β)/(2(N−2)) · r0²`.
pub fn ball_solution(n: usize, m: f64, beta: f64) -> Result<BallSolution> {
    check_ball_params(n, m, beta)?;
    let nf = n as f64;
    let ratio = m / (m + 2.0 * beta);
    let r0 = ratio.powf(1.0 / nf);
    let height = (m + 2.0 * beta) / unit_ball_volume(n);
    let scale = nf * (m + 2.0 * beta) / 2.0;
    let c0 = scale / (nf + 2.0) * ratio.powf((nf + 2.0) / nf)
        + scale / (nf - 2.0) * ratio.powf(2.0 / nf);
    Ok(BallSolution {
        n,
        m,
        beta,
        r0,
        height,
        c0,
    })
}

/// Potential of the unit-height ball indicator: the decaying solution of
/// `−Δφ = 1_{B(0, r0)}`, evaluated at radius `r`.
pub fn ball_phi(r: f64, n: usize, m: f64, beta: f64) -> Result<f64> {
    check_ball_params(n, m, beta)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    let nf = n as f64;
    let r0 = ball_solution(n, m, beta)?.r0;
    if r <= r0 {
        Ok(r0 * r0 / (2.0 * nf) + r0 * r0 / (nf * (nf - 2.0)) - r * r / (2.0 * nf))
    } else {
        Ok(r0.powi(n as i32) * r.powf(2.0 - nf) / (nf * (nf - 2.0)))
    }
}

/// Generated potential `ψ = K∗ρ₀ + β|x|²` of the ball solution: equal to
/// `c0` on the support, and
/// `m r²/2 + (m/(N−2)) r^{2−N} + β r² + I₂/2` outside it.
pub fn ball_psi(r: f64, n: usize, m: f64, beta: f64) -> Result<f64> {
    check_ball_params(n, m, beta)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    let sol = ball_solution(n, m, beta)?;
    if r <= sol.r0 {
        return Ok(sol.c0);
    }
    let nf = n as f64;
    Ok(m * r * r / 2.0
        + m / (nf - 2.0) * r.powf(2.0 - nf)
        + beta * r * r
        + 0.5 * sol.second_moment())
}

/// Energy of the ball solution, `½(m c₀ + β I₂)`.
pub fn ball_energy(n: usize, m: f64, beta: f64) -> Result<f64> {
    Ok(ball_solution(n, m, beta)?.energy())
}

/// Minimizer of the exponential-kernel energy on the line with quadratic
/// confinement: `ρ₀(x) = (β/2)[(1+L)² + 1 − x²]` on `[−L, L]`,
/// `L = (3m/(2β) + 1)^{1/3} − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp1dSolution {
    pub m: f64,
    pub beta: f64,
}

impl Exp1dSolution {
    pub fn new(m: f64, beta: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!(
                "the compactly supported profile needs β > 0, got {beta}"
            )));
        }
        Ok(Exp1dSolution { m, beta })
    }

    /// Half-width `L` of the support.
    pub fn support(&self) -> f64 {
        (1.5 * self.m / self.beta + 1.0).cbrt() - 1.0
    }

    /// Peak value `ρ₀(0)`.
    pub fn peak(&self) -> f64 {
        let l = self.support();
        0.5 * self.beta * ((1.0 + l) * (1.0 + l) + 1.0)
    }

    /// One-sided limit `ρ₀(L⁻) = β(1 + L)`; the profile drops to zero
    /// discontinuously just past it.
    pub fn edge_value(&self) -> f64 {
        self.beta * (1.0 + self.support())
    }

    /// Pointwise profile value.
    pub fn profile(&self, x: f64) -> f64 {
        let l = self.support();
        if x.abs() > l {
            return 0.0;
        }
        0.5 * self.beta * ((1.0 + l) * (1.0 + l) + 1.0 - x * x)
    }

    /// Average of the profile over `[a, b]`, exact through the antiderivative
    /// `(β/2)(Cx − x³/3)` clipped to the support.
    pub fn cell_average(&self, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!(
                "averaging interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        let l = self.support();
        let lo = a.max(-l);
        let hi = b.min(l);
        if hi <= lo {
            return Ok(0.0);
        }
        let c = (1.0 + l) * (1.0 + l) + 1.0;
        let anti = |x: f64| 0.5 * self.beta * (c * x - x * x * x / 3.0);
        Ok((anti(hi) - anti(lo)) / (b - a))
    }

    /// Deposits cell averages of the profile on a line grid.
    pub fn inject_line(&self, cells: usize, halfwidth: f64, cap: f64) -> Result<LineDensity> {
        let l = self.support();
        if halfwidth <= l {
            return Err(Error::Config(format!(
                "grid half-width {halfwidth} must exceed the support half-width {l}"
            )));
        }
        if cap < self.peak() {
            return Err(Error::Config(format!(
                "cap {cap} sits below the peak value {}",
                self.peak()
            )));
        }
        if cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        let h = 2.0 * halfwidth / cells as f64;
        let mut values = Vec::with_capacity(cells);
        for i in 0..cells {
            let a = -halfwidth + i as f64 * h;
            values.push(self.cell_average(a, a + h)?);
        }
        LineDensity::new(halfwidth, values, cap)
    }
}

/// Support half-width of the exponential-kernel line minimizer.
pub fn exp1d_support(m: f64, beta: f64) -> Result<f64> {
    Ok(Exp1dSolution::new(m, beta)?.support())
}

/// Pointwise value of the exponential-kernel line minimizer.
pub fn exp1d_profile(m: f64, beta: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("abscissa must be finite, got {x}")));
    }
    Ok(Exp1dSolution::new(m, beta)?.profile(x))
}

/// Exact average of the exponential-kernel line minimizer over `[a, b]`.
pub fn exp1d_cell_average(m: f64, beta: f64, a: f64, b: f64) -> Result<f64> {
    Exp1dSolution::new(m, beta)?.cell_average(a, b)
}

/// Equilibrium half-separation of two equal point masses `m/2` in three
/// dimensions: `a = ½ (m/(m+2β))^{1/3}`.
pub fn two_particle_equilibrium(m: f64, beta: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Domain(format!(
            "confinement strength must be nonnegative, got {beta}"
        )));
    }
    Ok(0.5 * (m / (m + 2.0 * beta)).cbrt())
}
