//! Truncated Chebyshev series on an arbitrary interval.
//!
//! A series with coefficients `c_0 .. c_{N-1}` on `[a, b]` represents
//!
//! ```text
//! f(x) ≈ Σ_{k=0}^{N-1} c_k T_k(t) − c_0 / 2,    t = (2x − a − b) / (b − a)
//! ```
//!
//! Coefficients are obtained by the discrete cosine sum over the `N` zeros
//! of `T_N`, which is exact for polynomials of degree below `N`. Scattered
//! material data is bridged to the node grid through its piecewise-linear
//! interpolant.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::material::MaterialDataset;

/// Relative threshold below which trailing coefficients are dropped.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
/// Upper bound on the default coefficient count for data fits.
pub const MAX_DEFAULT_COEFFS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebyshevError {
    #[error("coefficient count must be at least 1")]
    ZeroCount,
    #[error("invalid domain [{a}, {b}]: need finite a < b")]
    InvalidDomain { a: f64, b: f64 },
    #[error("non-finite coefficient c_{index} = {value}")]
    NonFiniteCoefficient { index: usize, value: f64 },
    #[error("function returned non-finite value {value} at x = {x}")]
    NonFiniteSample { x: f64, value: f64 },
    #[error("x = {x} outside surrogate domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
}

/// Zeros of `T_n`: `cos(π(k − ½)/n)` for `k = 1..=n`, strictly decreasing.
pub fn chebyshev_nodes(n: usize) -> Result<Vec<f64>, ChebyshevError> {
    if n == 0 {
        return Err(ChebyshevError::ZeroCount);
    }
    Ok((1..=n).map(|k| (PI * (k as f64 - 0.5) / n as f64).cos()).collect())
}

/// Raw coefficients `c_j = (2/N) Σ_k g(x_k) T_j(x_k)` of a function already
/// expressed on `[-1, 1]`, without truncation.
pub fn chebyshev_coefficients<F>(g: F, n: usize) -> Result<Vec<f64>, ChebyshevError>
where
    F: Fn(f64) -> f64,
{
    let nodes = chebyshev_nodes(n)?;
    let samples = nodes
        .iter()
        .map(|&t| {
            let v = g(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ChebyshevError::NonFiniteSample { x: t, value: v })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scale = 2.0 / n as f64;
    Ok((0..n)
        .map(|j| {
            let sum: f64 = samples
                .iter()
                .enumerate()
                .map(|(k, &f)| f * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                .sum();
            scale * sum
        })
        .collect())
}

/// Drops trailing coefficients with `|c_k| < tol · max_j |c_j|`, keeping at
/// least one.
pub fn truncate_coefficients(mut coeffs: Vec<f64>, tol: f64) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let cutoff = tol * max;
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() < cutoff) {
        coeffs.pop();
    }
    if max == 0.0 {
        coeffs.truncate(1);
    }
    coeffs
}

/// A Chebyshev series on `[a, b]` using the half-`c_0` convention.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSurrogate {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebyshevSurrogate {
    pub fn new(domain: (f64, f64), coeffs: Vec<f64>) -> Result<Self, ChebyshevError> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ChebyshevError::InvalidDomain { a, b });
        }
        if coeffs.is_empty() {
            return Err(ChebyshevError::ZeroCount);
        }
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(ChebyshevError::NonFiniteCoefficient { index, value });
        }
        Ok(Self { a, b, coeffs })
    }

    /// Fits `f` on `domain` with `n` nodes and the default truncation.
    pub fn fit_from_function<F>(f: F, domain: (f64, f64), n: usize) -> Result<Self, ChebyshevError>
    where
        F: Fn(f64) -> f64,
    {
        Self::fit_from_function_with_tol(f, domain, n, DEFAULT_TRUNC_TOL)
    }

    pub fn fit_from_function_with_tol<F>(
        f: F,
        domain: (f64, f64),
        n: usize,
        trunc_tol: f64,
    ) -> Result<Self, ChebyshevError>
    where
        F: Fn(f64) -> f64,
    {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ChebyshevError::InvalidDomain { a, b });
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let coeffs = chebyshev_coefficients(|t| f(mid + half * t), n).map_err(|e| match e {
            ChebyshevError::NonFiniteSample { x, value } => ChebyshevError::NonFiniteSample {
                x: mid + half * x,
                value,
            },
            other => other,
        })?;
        Self::new(domain, truncate_coefficients(coeffs, trunc_tol))
    }

    /// Fits the piecewise-linear interpolant of `dataset` over its strain
    /// range with `n` nodes.
    pub fn fit_from_data(dataset: &MaterialDataset, n: usize) -> Result<Self, ChebyshevError> {
        Self::fit_from_data_with_tol(dataset, n, DEFAULT_TRUNC_TOL)
    }

    pub fn fit_from_data_with_tol(dataset: &MaterialDataset, n: usize, trunc_tol: f64) -> Result<Self, ChebyshevError> {
        Self::fit_from_function_with_tol(
            |x| dataset.interpolate(x),
            (dataset.strain_min(), dataset.strain_max()),
            n,
            trunc_tol,
        )
    }

    /// `min(64, 4d)` nodes for a dataset of `d` points.
    pub fn default_count(dataset: &MaterialDataset) -> usize {
        MAX_DEFAULT_COEFFS.min(4 * dataset.len())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Retained coefficient count `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn slack(&self) -> f64 {
        1e-9 * (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        let s = self.slack();
        x >= self.a - s && x <= self.b + s
    }

    /// Maps `x` to `[-1, 1]`, clamping points inside the slack band.
    fn to_unit(&self, x: f64) -> Result<f64, ChebyshevError> {
        if !self.contains(x) {
            return Err(ChebyshevError::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        Ok(t.clamp(-1.0, 1.0))
    }

    /// Clenshaw evaluation of the series at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, ChebyshevError> {
        Ok(clenshaw(&self.coeffs, self.to_unit(x)?))
    }

    /// Term-by-term evaluation `Σ c_k cos(k·arccos t) − c_0/2`.
    pub fn eval_direct(&self, x: f64) -> Result<f64, ChebyshevError> {
        let theta = self.to_unit(x)?.acos();
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * theta).cos())
            .sum();
        Ok(sum - 0.5 * self.coeffs[0])
    }

    /// Series of the derivative on the same domain.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self {
                a: self.a,
                b: self.b,
                coeffs: vec![0.0],
            };
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n + 1];
        // d_{k-1} = d_{k+1} + 2k c_k, with d_n = d_{n+1} = 0
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
        }
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        d.iter_mut().for_each(|v| *v *= scale);
        Self {
            a: self.a,
            b: self.b,
            coeffs: d,
        }
    }

    /// Series of the antiderivative, zero at `max(a, min(b, 0))`.
    pub fn antiderivative(&self) -> Self {
        let n = self.coeffs.len();
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        let con = 0.25 * (self.b - self.a);
        let mut out = vec![0.0; n + 1];
        for (j, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = con * (c(j - 1) - c(j + 1)) / j as f64;
        }
        let mut s = Self {
            a: self.a,
            b: self.b,
            coeffs: out,
        };
        let anchor = s.energy_anchor();
        let at_anchor = clenshaw(&s.coeffs, (2.0 * anchor - s.a - s.b) / (s.b - s.a));
        // eval carries +c_0/2, so this zeroes the anchor value
        s.coeffs[0] = -2.0 * at_anchor;
        s
    }

    /// Point where [`antiderivative`](Self::antiderivative) vanishes: zero
    /// strain when the domain contains it, else the nearest endpoint.
    pub fn energy_anchor(&self) -> f64 {
        self.a.max(self.b.min(0.0))
    }

    /// Coefficient dump: a `# domain: a,b` comment line, a `k,coefficient`
    /// header, then one row per coefficient.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# domain: {:.16e},{:.16e}", self.a, self.b);
        out.push_str("k,coefficient\n");
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{k},{c:.16e}");
        }
        out
    }
}

/// Clenshaw recurrence for `Σ c_k T_k(t) − c_0/2`.
fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let two_t = 2.0 * t;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = two_t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + 0.5 * coeffs[0]
}
