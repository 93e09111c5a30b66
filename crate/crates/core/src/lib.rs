//! Structure-preserving time integration for the periodic KdV equation
//! `u_t = alpha u u_x + nu u_xxx` on `[-l, l]`.
//!
//! The state lives in a truncated orthonormal trigonometric basis
//! ([`spectral`]). On top of it sit the mass, momentum and energy functionals
//! with their variational and discrete variational derivatives
//! ([`functionals`]), the orthogonal projector onto the discrete tangent space
//! ([`projection`]), and three steppers ([`integrators`]): a Butcher-tableau
//! Runge-Kutta method, the energy-preserving average-vector-field scheme, and
//! a projected Runge-Kutta scheme that keeps all selected invariants at once.
//!
//! Everything is generic over the scalar type; the `*64` aliases below are what
//! most callers want.

pub mod functionals;
pub mod integrators;
pub mod kdv;
pub mod projection;
pub mod scalar;
pub mod spectral;

pub use functionals::{FunctionalKind, KdvModel, KdvParams};
pub use integrators::{
    ButcherTableau, IntegrateError, Scheme, SolverSettings, StepDiagnostics, StepError, StepInfo,
};
pub use kdv::{Peak, ProblemSetup, TwoSolitonParams};
pub use projection::{ProjectionError, ProjectionFrame};
pub use scalar::Real;
pub use spectral::{BasisSpec, DiffMatrix, GridField, SpectralError, SpectralField, SpectralGrid};

pub type BasisSpec64 = BasisSpec<f64>;
pub type SpectralField64 = SpectralField<f64>;
pub type GridField64 = GridField<f64>;
pub type SpectralGrid64 = SpectralGrid<f64>;
pub type KdvModel64 = KdvModel<f64>;
pub type ButcherTableau64 = ButcherTableau<f64>;
pub type SolverSettings64 = SolverSettings<f64>;
pub type StepDiagnostics64 = StepDiagnostics<f64>;

pub type BasisSpec32 = BasisSpec<f32>;
pub type SpectralField32 = SpectralField<f32>;
pub type KdvModel32 = KdvModel<f32>;
