//! Spectral solvers and diagnostics for the `N`-coupled focusing cubic
//! Schrödinger system `i∂_t u_j + Δu_j = -2(Σ_k|u_k|^2)u_j + |u_j|^2 u_j`
//! on a periodic square box.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the working precision used by the tools.

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod nonlinearity;
pub mod norms;
pub mod real;
pub mod snapshot;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
pub use field::{finite_labels, symmetric_labels, VecField};
pub use grid::Grid2D;
pub use real::Real;

pub type Grid = Grid2D<f64>;
pub type Field = VecField<f64>;
pub type GroundState = groundstate::GroundState<f64>;
pub type VectorGroundState = groundstate::VectorGroundState<f64>;
pub type SharpConstants = variational::SharpConstants<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type EvolutionOutcome = solver::EvolutionOutcome<f64>;
pub type DiagnosticsRecord = diagnostics::DiagnosticsRecord<f64>;
pub type MorawetzKernel = diagnostics::MorawetzKernel<f64>;

pub type Grid32 = Grid2D<f32>;
pub type Field32 = VecField<f32>;
