//! Nadaraya–Watson regression with a Gaussian kernel, the lookup-style
//! baseline surrogate. The bandwidth `alpha` (units 1/strain²) is picked by
//! leave-one-out cross-validation over a log-spaced grid.

use thiserror::Error;

use crate::material::{MaterialDataset, MaterialPoint};

/// Number of grid points in [`default_alpha_grid`].
pub const DEFAULT_GRID_SIZE: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("bandwidth alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("kernel regression needs at least one data point")]
    NoData,
    #[error("leave-one-out cross-validation needs at least 3 points, got {0}")]
    TooFewForCrossValidation(usize),
    #[error("bandwidth grid is empty")]
    EmptyGrid,
}

/// Gaussian kernel estimator over a fixed set of observations.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSurrogate {
    strains: Vec<f64>,
    stresses: Vec<f64>,
    alpha: f64,
    stress_bounds: (f64, f64),
}

impl KernelSurrogate {
    pub fn new(dataset: &MaterialDataset, alpha: f64) -> Result<Self, KernelError> {
        Self::from_points(dataset.points(), alpha)
    }

    /// Builds the estimator from raw points; unlike [`MaterialDataset`] a
    /// single observation is allowed.
    pub fn from_points(points: &[MaterialPoint], alpha: f64) -> Result<Self, KernelError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(KernelError::InvalidAlpha(alpha));
        }
        if points.is_empty() {
            return Err(KernelError::NoData);
        }
        let stresses: Vec<f64> = points.iter().map(|p| p.stress).collect();
        let stress_bounds = stresses
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            });
        Ok(Self {
            strains: points.iter().map(|p| p.strain).collect(),
            stresses,
            alpha,
            stress_bounds,
        })
    }

    /// Fits with the bandwidth chosen by [`cross_validate_alpha`] on the
    /// default grid.
    pub fn fit_cross_validated(dataset: &MaterialDataset) -> Result<Self, KernelError> {
        let alpha = cross_validate_alpha(dataset, &default_alpha_grid(dataset, DEFAULT_GRID_SIZE))?;
        Self::new(dataset, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smallest and largest observed stress; every estimate lies between them.
    pub fn stress_bounds(&self) -> (f64, f64) {
        self.stress_bounds
    }

    pub fn len(&self) -> usize {
        self.strains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strains.is_empty()
    }

    /// Stress estimate at `strain`, always within the observed stress range.
    pub fn eval(&self, strain: f64) -> f64 {
        let (lo, hi) = self.stress_bounds;
        // rounding in num/den can step one ulp past the hull
        weighted_mean(&self.strains, &self.stresses, self.alpha, strain, None).clamp(lo, hi)
    }

    /// Analytic derivative `ds/dε = Σ w'_j (σ_j − s) / Σ w_j` with
    /// `w'_j = −2α(ε − ε_j) w_j`. Stresses are taken relative to the first
    /// observation so a constant dataset gives exactly zero.
    pub fn eval_derivative(&self, strain: f64) -> f64 {
        let shift = min_sq_distance(&self.strains, strain, None);
        let base = self.stresses[0];
        let (mut w_sum, mut dw_sum, mut ws_sum, mut dws_sum) = (0.0, 0.0, 0.0, 0.0);
        for (&e, &sig) in self.strains.iter().zip(&self.stresses) {
            let dx = strain - e;
            let w = (-self.alpha * (dx * dx - shift)).exp();
            let dw = -2.0 * self.alpha * dx * w;
            let rel = sig - base;
            w_sum += w;
            dw_sum += dw;
            ws_sum += w * rel;
            dws_sum += dw * rel;
        }
        (dws_sum - dw_sum * ws_sum / w_sum) / w_sum
    }
}

fn min_sq_distance(strains: &[f64], x: f64, skip: Option<usize>) -> f64 {
    strains
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, e)| (x - e).powi(2))
        .fold(f64::INFINITY, f64::min)
}

/// Kernel-weighted mean with the largest exponent shifted to zero, so the
/// denominator is at least one. `skip` leaves one observation out.
fn weighted_mean(strains: &[f64], stresses: &[f64], alpha: f64, x: f64, skip: Option<usize>) -> f64 {
    let shift = min_sq_distance(strains, x, skip);
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (&e, &s)) in strains.iter().zip(stresses).enumerate() {
        if Some(j) == skip {
            continue;
        }
        let w = (-alpha * ((x - e).powi(2) - shift)).exp();
        num += w * s;
        den += w;
    }
    num / den
}

/// Leave-one-out squared prediction error `Σ_j (σ_j − s_{−j}(ε_j))²`.
pub fn loo_error(dataset: &MaterialDataset, alpha: f64) -> f64 {
    let strains: Vec<f64> = dataset.strains().collect();
    let stresses: Vec<f64> = dataset.stresses().collect();
    (0..strains.len())
        .map(|j| {
            let pred = weighted_mean(&strains, &stresses, alpha, strains[j], Some(j));
            (stresses[j] - pred).powi(2)
        })
        .sum()
}

/// Grid value with the smallest leave-one-out error; ties go to the smaller
/// bandwidth value.
pub fn cross_validate_alpha(dataset: &MaterialDataset, grid: &[f64]) -> Result<f64, KernelError> {
    if dataset.len() < 3 {
        return Err(KernelError::TooFewForCrossValidation(dataset.len()));
    }
    if grid.is_empty() {
        return Err(KernelError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(KernelError::InvalidAlpha(bad));
    }
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        let err = loo_error(dataset, alpha);
        best = match best {
            None => Some((alpha, err)),
            Some((ba, be)) if err < be || (err == be && alpha < ba) => Some((alpha, err)),
            keep => keep,
        };
    }
    Ok(best.map(|(a, _)| a).expect("grid is nonempty"))
}

/// `size` log-spaced values spanning `[1/range², 1e6/range²]` where range
/// is the dataset strain span.
pub fn default_alpha_grid(dataset: &MaterialDataset, size: usize) -> Vec<f64> {
    let base = 1.0 / dataset.strain_range().powi(2);
    match size {
        0 => Vec::new(),
        1 => vec![base],
        _ => (0..size)
            .map(|i| base * 10f64.powf(6.0 * i as f64 / (size - 1) as f64))
            .collect(),
    }
}
