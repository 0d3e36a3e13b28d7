//! Independent numerical checks of the closed forms.
//!
//! * [`fd`]: finite-difference eigenvalues of each separated equation.
//! * [`residual`]: closed-form factors in their ODEs (analytic derivatives)
//!   and whole states under the Cartesian Hamiltonian (finite differences).
//! * [`quad`]: tanh-sinh quadrature for the Gram check.
//! * [`suite`]: all of the above for one model and branch, as a report.

pub mod fd;
pub mod quad;
pub mod residual;
pub mod suite;

use thiserror::Error;

use crate::coords::CoordError;
use crate::model::{ModelError, ModelKind};
use crate::orthopoly::PolyError;
use crate::spectrum::SpectrumError;
use crate::tridiag::TridiagError;
use crate::wavefunc::WaveError;

pub use fd::{fd_eigenvalues, fd_extrapolated, Boundary, Extrapolated, OdeSpec};
pub use residual::{
    cartesian_potential, full_hamiltonian_residual, full_hamiltonian_residual_with, ode_residual, ode_residual_with,
    sample_configs, separated_equation,
};
pub use suite::{gram_matrix, lowest_states, verify_suite, SuiteOptions, VerificationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid of {n_grid} points is below the minimum {min}")]
    Grid { n_grid: usize, min: usize },
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Coord(#[from] CoordError),
    #[error("the {kind} model has no {role} factor")]
    NoSuchFactor { role: &'static str, kind: ModelKind },
    #[error("sample {x} is not strictly inside ({lo}, {hi}) or sits on a singular point")]
    Sample { x: f64, lo: f64, hi: f64 },
    #[error("configuration is {distance} from the singular manifold {manifold}")]
    TooClose { manifold: String, distance: f64 },
    #[error("branch is not admissible: {constraint} violated (margin {margin})")]
    Inadmissible { constraint: String, margin: f64 },
}
