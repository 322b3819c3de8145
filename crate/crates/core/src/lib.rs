//! Data-driven equilibrium of elastic trusses.
//!
//! Instead of fitting a constitutive law, the member stress–strain relation
//! is read from a surrogate built directly on observed `(strain, stress)`
//! pairs:
//!
//! * [`chebyshev`]: a truncated Chebyshev series fitted once to the data,
//!   then evaluated like an ordinary function;
//! * [`kernel`]: Gaussian kernel regression with a cross-validated
//!   bandwidth, evaluated against the full dataset on every lookup.
//!
//! [`truss`] supplies the compatibility vectors and volumes of a planar
//! small-deformation truss, and [`solver`] drives the equilibrium residual
//! to zero with damped Newton steps, tracing paths over a load multiplier.

pub mod chebyshev;
pub mod kernel;
pub mod material;
pub mod solver;
pub mod surrogate;
pub mod truss;

/// Displacement vectors are nalgebra column vectors.
pub use nalgebra::DVector;

pub use chebyshev::{chebyshev_nodes, ChebyshevError, ChebyshevSurrogate};
pub use kernel::{cross_validate_alpha, default_alpha_grid, KernelError, KernelSurrogate};
pub use material::{
    load_dataset, save_dataset, synth_dataset, DatasetError, LawParams, MaterialDataset, MaterialLaw, MaterialPoint,
    SynthSpec,
};
pub use solver::{
    newton_solve, strain_energy, trace_path, EquilibriumPath, PathFailure, PathStep, SolveResult, SolveSettings,
    SolverError, Termination,
};
pub use surrogate::{ChebyshevLaw, Constitutive, DomainError, LinearLaw};
pub use truss::{build_truss, ten_bar_config, ten_bar_truss, TrussConfig, TrussError, TrussModel};
