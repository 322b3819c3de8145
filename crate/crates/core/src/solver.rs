//! Damped Newton solution of the data-driven equilibrium `r(u) = 0` and
//! load-multiplier continuation.
//!
//! Member stresses are taken straight from the constitutive surrogate, so
//! the stress mismatch `‖σ − s‖` is zero by construction and the remaining
//! unknowns are the free displacements.

use nalgebra::DVector;
use thiserror::Error;

use crate::surrogate::Constitutive;
use crate::truss::{TrussError, TrussModel};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error("singular tangent stiffness at iteration {iteration}")]
    SingularTangent { iteration: usize },
    #[error("non-finite residual at iteration {iteration}")]
    NonFiniteResidual { iteration: usize },
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("load multipliers must be finite and strictly increasing")]
    InvalidLambdas,
}

impl SolverError {
    /// The out-of-domain strain behind this error, if that is its cause.
    pub fn domain_exit(&self) -> Option<DomainExit> {
        match self {
            SolverError::Truss(e) => DomainExit::from_truss(e),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveSettings {
    /// Residual tolerance relative to `‖λ p_ref‖`.
    pub tol_rel: f64,
    /// Absolute residual tolerance, N.
    pub tol_abs: f64,
    pub max_iter: usize,
    /// Step reduction factor during backtracking.
    pub damping: f64,
    pub max_backtracks: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol_rel: 1e-9,
            tol_abs: 1e-12,
            max_iter: 50,
            damping: 0.5,
            max_backtracks: 30,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidSettings(m.to_string()));
        if !(self.tol_rel.is_finite() && self.tol_rel > 0.0) {
            return bad("tol_rel must be positive");
        }
        if !(self.tol_abs.is_finite() && self.tol_abs > 0.0) {
            return bad("tol_abs must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad("damping must lie in (0, 1)");
        }
        Ok(())
    }

    /// Convergence threshold `max(tol_abs, tol_rel·‖λ p_ref‖, floor)`, where
    /// `floor` is the rounding level of the residual itself (see
    /// [`residual_floor`]). The floor only matters near `λ = 0`.
    pub fn threshold<S: Constitutive + ?Sized>(&self, model: &TrussModel, surrogate: &S, lambda: f64) -> f64 {
        self.tol_abs
            .max(self.tol_rel * lambda.abs() * model.p_ref().norm())
            .max(residual_floor(model, surrogate))
    }
}

/// Rounding level of `‖Σ v s(ε) b‖`: `ROUNDING_SLACK · ε_mach · stress_scale · Σ v ‖b‖`.
pub fn residual_floor<S: Constitutive + ?Sized>(model: &TrussModel, surrogate: &S) -> f64 {
    let weight: f64 = model
        .members()
        .iter()
        .map(|m| m.volume * m.b.iter().map(|(_, c)| c * c).sum::<f64>().sqrt())
        .sum();
    ROUNDING_SLACK * f64::EPSILON * surrogate.stress_scale() * weight
}

const ROUNDING_SLACK: f64 = 16.0;

/// Member strain that left the surrogate domain during a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainExit {
    pub member: String,
    pub strain: f64,
    pub lo: f64,
    pub hi: f64,
}

impl DomainExit {
    fn from_truss(e: &TrussError) -> Option<Self> {
        match e {
            TrussError::StrainOutOfDomain { member, strain, lo, hi } => Some(Self {
                member: member.clone(),
                strain: *strain,
                lo: *lo,
                hi: *hi,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub u: DVector<f64>,
    pub strains: Vec<f64>,
    pub stresses: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Total stored strain energy, J.
    pub energy: f64,
    pub converged: bool,
    pub termination: Termination,
    /// Most recent trial step rejected for leaving the surrogate domain.
    pub last_domain_exit: Option<DomainExit>,
}

/// Solves `r(u) = 0` at load multiplier `lambda` starting from `u0`.
///
/// Each iteration solves `K(u)Δ = −r(u)` by LU with partial pivoting and
/// accepts the first of `Δ, dΔ, d²Δ, …` (`d` = damping) that keeps every
/// member strain in the surrogate domain and strictly reduces `‖r‖`.
pub fn newton_solve<S: Constitutive + ?Sized>(
    model: &TrussModel,
    surrogate: &S,
    lambda: f64,
    u0: &DVector<f64>,
    settings: &SolveSettings,
) -> Result<SolveResult, SolverError> {
    settings.validate()?;
    let threshold = settings.threshold(model, surrogate, lambda);
    let mut u = u0.clone();
    let mut r = model.residual(surrogate, &u, lambda)?;
    let mut norm = r.norm();
    let mut iterations = 0;
    let mut last_domain_exit = None;

    let termination = loop {
        if !norm.is_finite() {
            return Err(SolverError::NonFiniteResidual { iteration: iterations });
        }
        if norm <= threshold {
            break Termination::Converged;
        }
        if iterations == settings.max_iter {
            break Termination::MaxIterations;
        }
        let k = model.tangent(surrogate, &u)?;
        let delta = k
            .lu()
            .solve(&(-&r))
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or(SolverError::SingularTangent { iteration: iterations })?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_backtracks {
            let trial = &u + step * &delta;
            match model.residual(surrogate, &trial, lambda) {
                Ok(rt) => {
                    let nt = rt.norm();
                    if nt < norm {
                        accepted = Some((trial, rt, nt));
                        break;
                    }
                }
                Err(e @ TrussError::StrainOutOfDomain { .. }) => {
                    last_domain_exit = DomainExit::from_truss(&e);
                }
                Err(e) => return Err(e.into()),
            }
            step *= settings.damping;
        }
        let Some((nu, nr, nn)) = accepted else {
            break Termination::LineSearchFailed;
        };
        u = nu;
        r = nr;
        norm = nn;
        iterations += 1;
    };

    let strains = model.strains(&u);
    let stresses = strains
        .iter()
        .zip(model.members())
        .map(|(&e, m)| {
            surrogate.stress(e).map_err(|d| TrussError::StrainOutOfDomain {
                member: m.id.clone(),
                strain: d.strain,
                lo: d.lo,
                hi: d.hi,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let energy = strain_energy(model, surrogate, &u)?;
    Ok(SolveResult {
        u,
        strains,
        stresses,
        residual_norm: norm,
        iterations,
        energy,
        converged: termination == Termination::Converged,
        termination,
        last_domain_exit,
    })
}

/// Total stored energy `Σ v_i W(ε_i)`, J.
pub fn strain_energy<S: Constitutive + ?Sized>(
    model: &TrussModel,
    surrogate: &S,
    u: &DVector<f64>,
) -> Result<f64, TrussError> {
    model.members().iter().try_fold(0.0, |acc, m| {
        let w = surrogate
            .energy_density(m.strain(u))
            .map_err(|d| TrussError::StrainOutOfDomain {
                member: m.id.clone(),
                strain: d.strain,
                lo: d.lo,
                hi: d.hi,
            })?;
        Ok(acc + m.volume * w)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathStep {
    pub lambda: f64,
    pub result: SolveResult,
}

/// Why a continuation stopped before its last load multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFailure {
    pub lambda: f64,
    pub reason: String,
    /// Set when the failure traces back to a strain outside the surrogate
    /// domain, i.e. the data does not cover the load level.
    pub domain_exit: Option<DomainExit>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EquilibriumPath {
    pub steps: Vec<PathStep>,
    pub failure: Option<PathFailure>,
}

impl EquilibriumPath {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Sequential solves over increasing `lambdas`, each warm-started from the
/// previous converged displacement. The path is truncated at the first
/// step that fails.
pub fn trace_path<S: Constitutive + ?Sized>(
    model: &TrussModel,
    surrogate: &S,
    lambdas: &[f64],
    settings: &SolveSettings,
) -> Result<EquilibriumPath, SolverError> {
    trace_path_with(model, surrogate, lambdas, settings, true)
}

/// [`trace_path`] with warm starting optional; cold steps start from zero.
pub fn trace_path_with<S: Constitutive + ?Sized>(
    model: &TrussModel,
    surrogate: &S,
    lambdas: &[f64],
    settings: &SolveSettings,
    warm_start: bool,
) -> Result<EquilibriumPath, SolverError> {
    settings.validate()?;
    if lambdas.iter().any(|l| !l.is_finite()) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidLambdas);
    }
    let zero = DVector::zeros(model.n_free());
    let mut path = EquilibriumPath::default();
    for &lambda in lambdas {
        let start = match path.steps.last() {
            Some(prev) if warm_start => &prev.result.u,
            _ => &zero,
        };
        match newton_solve(model, surrogate, lambda, start, settings) {
            Ok(result) if result.converged => path.steps.push(PathStep { lambda, result }),
            Ok(result) => {
                let reason = match (&result.last_domain_exit, result.termination) {
                    (Some(d), _) => format!(
                        "no equilibrium within data coverage: member {} needs strain {} outside [{}, {}]",
                        d.member, d.strain, d.lo, d.hi
                    ),
                    (None, Termination::MaxIterations) => {
                        format!(
                            "not converged after {} iterations (residual {:e})",
                            result.iterations, result.residual_norm
                        )
                    }
                    (None, _) => format!("line search stalled (residual {:e})", result.residual_norm),
                };
                path.failure = Some(PathFailure {
                    lambda,
                    reason,
                    domain_exit: result.last_domain_exit,
                });
                break;
            }
            Err(e) => {
                path.failure = Some(PathFailure {
                    lambda,
                    reason: e.to_string(),
                    domain_exit: e.domain_exit(),
                });
                break;
            }
        }
    }
    Ok(path)
}
