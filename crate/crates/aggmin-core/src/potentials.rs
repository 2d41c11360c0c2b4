//! Interaction kernels and external confinement potentials.
//!
//! The power-law kernel is `K(r) = r^q/q − r^p/p` with attraction exponent
//! `q` and repulsion exponent `p`, defined for `q > p` and nonzero exponents.
//! With `p < 0` the kernel blows up at the origin, so evaluations below a
//! hard separation threshold are rejected instead of clamped. The
//! exponential kernel `K(r) = e^{−r}` serves the one-dimensional interval
//! profile. Confinement is either absent or the quadratic well `β|x|²`.

use crate::{Error, Result};

/// Separation below which two points count as coincident for singular
/// kernels. Evaluations under this distance are refused.
pub(crate) const MIN_SEPARATION: f64 = 1e-12;

/// Power-law kernel `r^q/q − r^p/p` with `q > p`, `p ≠ 0`, `q ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawKernel {
    p: f64,
    q: f64,
}

impl PowerLawKernel {
    /// Builds a kernel after checking `q > p` and that neither exponent is
    /// zero. The dimension-dependent constraint `p > −N` is checked
    /// separately once the ambient dimension is known.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::Config(format!(
                "kernel exponents must be finite, got p={p}, q={q}"
            )));
        }
        if p == 0.0 || q == 0.0 {
            return Err(Error::Config(format!(
                "kernel exponents must be nonzero, got p={p}, q={q}"
            )));
        }
        if q <= p {
            return Err(Error::Config(format!(
                "attraction exponent must exceed repulsion exponent, got p={p}, q={q}"
            )));
        }
        Ok(PowerLawKernel { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Checks the integrability constraint `p > −N` for dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.p <= -(dim as f64) {
            return Err(Error::Config(format!(
                "repulsion exponent p={} must exceed −N={} for dimension {}",
                self.p,
                -(dim as f64),
                dim
            )));
        }
        Ok(())
    }

    /// Global lower bound `1/q − 1/p`, available when `0 < p < q`.
    pub fn lower_bound(&self) -> Option<f64> {
        if self.p > 0.0 {
            Some(1.0 / self.q - 1.0 / self.p)
        } else {
            None
        }
    }
}

/// Radial interaction kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    PowerLaw(PowerLawKernel),
    Exponential,
}

/// `r^e` with an exact fast path for small integer exponents.
fn power(r: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        r.powi(e as i32)
    } else {
        r.powf(e)
    }
}

impl Kernel {
    pub fn power_law(p: f64, q: f64) -> Result<Self> {
        Ok(Kernel::PowerLaw(PowerLawKernel::new(p, q)?))
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Domain(format!(
                "kernel evaluated at non-positive radius r={r}"
            )));
        }
        if let Kernel::PowerLaw(k) = self {
            if k.p < 0.0 && r < MIN_SEPARATION {
                return Err(Error::Domain(format!(
                    "kernel with p={} is singular at r={r:e} (below separation threshold)",
                    k.p
                )));
            }
        }
        Ok(())
    }

    /// Kernel value `K(r)` for `r > 0`.
    pub fn value(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(match self {
            Kernel::PowerLaw(k) => power(r, k.q) / k.q - power(r, k.p) / k.p,
            Kernel::Exponential => (-r).exp(),
        })
    }

    /// Radial derivative `K′(r)` for `r > 0`.
    pub fn slope(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(match self {
            Kernel::PowerLaw(k) => power(r, k.q - 1.0) - power(r, k.p - 1.0),
            Kernel::Exponential => -(-r).exp(),
        })
    }

    /// Lower bound on the kernel value, when one is known.
    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            Kernel::PowerLaw(k) => k.lower_bound(),
            Kernel::Exponential => None,
        }
    }

    /// Whether `K` is unbounded at the origin.
    pub fn is_singular(&self) -> bool {
        matches!(self, Kernel::PowerLaw(k) if k.p < 0.0)
    }
}

/// External confinement potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Confinement {
    None,
    Quadratic { beta: f64 },
}

impl Confinement {
    pub fn quadratic(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::Config(format!(
                "confinement strength must be a nonnegative real, got beta={beta}"
            )));
        }
        Ok(Confinement::Quadratic { beta })
    }

    /// Potential value at a point.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Confinement::None => 0.0,
            Confinement::Quadratic { beta } => {
                beta * x.iter().map(|c| c * c).sum::<f64>()
            }
        }
    }

    /// Potential value at squared distance `r²` from the origin.
    pub fn value_at_radius_sq(&self, r_sq: f64) -> f64 {
        match self {
            Confinement::None => 0.0,
            Confinement::Quadratic { beta } => beta * r_sq,
        }
    }

    /// Gradient at a point.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    /// Writes the gradient at `x` into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Confinement::None => out.fill(0.0),
            Confinement::Quadratic { beta } => {
                for (o, c) in out.iter_mut().zip(x) {
                    *o = 2.0 * beta * c;
                }
            }
        }
    }

    /// Value and gradient together.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
}
