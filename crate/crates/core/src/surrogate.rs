//! The constitutive interface the truss and solver see: a stress lookup
//! with its slope and stored-energy density, implemented by the Chebyshev
//! and kernel surrogates and by an exact linear law.

use thiserror::Error;

use crate::chebyshev::{ChebyshevError, ChebyshevSurrogate};
use crate::kernel::KernelSurrogate;

/// A strain fell outside the range a surrogate was built on.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("strain {strain} outside surrogate domain [{lo}, {hi}]")]
pub struct DomainError {
    pub strain: f64,
    pub lo: f64,
    pub hi: f64,
}

pub trait Constitutive {
    /// Stress `s(ε)`.
    fn stress(&self, strain: f64) -> Result<f64, DomainError>;

    /// Tangent modulus `s'(ε)`.
    fn tangent_modulus(&self, strain: f64) -> Result<f64, DomainError>;

    /// Stored energy density `W(ε) = ∫ s dε` from [`energy_anchor`](Self::energy_anchor).
    fn energy_density(&self, strain: f64) -> Result<f64, DomainError>;

    /// Strain at which `W` vanishes.
    fn energy_anchor(&self) -> f64 {
        0.0
    }

    /// Closed strain interval on which the surrogate is defined, if bounded.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }

    /// Magnitude of the terms a stress evaluation sums, so that
    /// `ε_mach · stress_scale()` bounds its rounding error. Zero for laws
    /// evaluated to full relative precision.
    fn stress_scale(&self) -> f64 {
        0.0
    }

    /// Short label used in reports.
    fn name(&self) -> &'static str;
}

/// Exact Hooke law `s = E ε` on the whole real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearLaw {
    pub modulus: f64,
}

impl Constitutive for LinearLaw {
    fn stress(&self, strain: f64) -> Result<f64, DomainError> {
        Ok(self.modulus * strain)
    }

    fn tangent_modulus(&self, _strain: f64) -> Result<f64, DomainError> {
        Ok(self.modulus)
    }

    fn energy_density(&self, strain: f64) -> Result<f64, DomainError> {
        Ok(0.5 * self.modulus * strain * strain)
    }

    fn name(&self) -> &'static str {
        "linear"
    }
}

/// A fitted Chebyshev curve bundled with its derivative and antiderivative
/// so repeated solver calls do not rebuild them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevLaw {
    curve: ChebyshevSurrogate,
    slope: ChebyshevSurrogate,
    energy: ChebyshevSurrogate,
}

impl ChebyshevLaw {
    pub fn new(curve: ChebyshevSurrogate) -> Self {
        let slope = curve.derivative();
        let energy = curve.antiderivative();
        Self { curve, slope, energy }
    }

    pub fn curve(&self) -> &ChebyshevSurrogate {
        &self.curve
    }

    fn lift(&self, r: Result<f64, ChebyshevError>, strain: f64) -> Result<f64, DomainError> {
        r.map_err(|_| {
            let (lo, hi) = self.curve.domain();
            DomainError { strain, lo, hi }
        })
    }
}

impl From<ChebyshevSurrogate> for ChebyshevLaw {
    fn from(curve: ChebyshevSurrogate) -> Self {
        Self::new(curve)
    }
}

impl Constitutive for ChebyshevLaw {
    fn stress(&self, strain: f64) -> Result<f64, DomainError> {
        self.lift(self.curve.eval(strain), strain)
    }

    fn tangent_modulus(&self, strain: f64) -> Result<f64, DomainError> {
        self.lift(self.slope.eval(strain), strain)
    }

    fn energy_density(&self, strain: f64) -> Result<f64, DomainError> {
        self.lift(self.energy.eval(strain), strain)
    }

    fn energy_anchor(&self) -> f64 {
        self.curve.energy_anchor()
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some(self.curve.domain())
    }

    fn stress_scale(&self) -> f64 {
        self.curve.coeffs().iter().map(|c| c.abs()).sum()
    }

    fn name(&self) -> &'static str {
        "chebyshev"
    }
}

// 5-point Gauss–Legendre rule on [-1, 1]
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

impl Constitutive for KernelSurrogate {
    fn stress(&self, strain: f64) -> Result<f64, DomainError> {
        Ok(self.eval(strain))
    }

    fn tangent_modulus(&self, strain: f64) -> Result<f64, DomainError> {
        Ok(self.eval_derivative(strain))
    }

    /// Composite Gauss–Legendre quadrature of the estimator from zero, with
    /// panels no wider than a quarter kernel width.
    fn energy_density(&self, strain: f64) -> Result<f64, DomainError> {
        if strain == 0.0 {
            return Ok(0.0);
        }
        let panels = (strain.abs() * self.alpha().sqrt() * 4.0).ceil().clamp(1.0, 1e5) as usize;
        let h = strain / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            let panel: f64 = GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(t, w)| w * self.eval(mid + 0.5 * h * t))
                .sum();
            total += 0.5 * h * panel;
        }
        Ok(total)
    }

    fn stress_scale(&self) -> f64 {
        let (lo, hi) = self.stress_bounds();
        lo.abs().max(hi.abs())
    }

    fn name(&self) -> &'static str {
        "kernel"
    }
}
