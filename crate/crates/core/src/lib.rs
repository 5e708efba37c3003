//! Implicit Euler solver and verification checks for the weighted,
//! degenerate p-Laplacian gradient flow
//!
//! ```text
//! v du/dt = div(|sqrt(Q) grad u|^(p-2) Q grad u)   in Omega,   u = 0 on the boundary
//! ```
//!
//! on axis-aligned boxes in one to three dimensions.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the checks are
//! calibrated for.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod initial;
pub mod io;
pub mod linalg;
pub mod prox;
pub mod scalar;
pub mod sparse;
pub mod weight_field;

pub use error::{Error, Result};
pub use grid::{CellVectorField, Grid, GridFunction};
pub use initial::InitialDatum;
pub use scalar::Real;
pub use weight_field::{build_field, MatrixWeightField, WeightFamilySpec};

pub type Grid64 = grid::Grid<f64>;
pub type GridFunction64 = grid::GridFunction<f64>;
pub type CellVectorField64 = grid::CellVectorField<f64>;
pub type MatrixWeightField64 = weight_field::MatrixWeightField<f64>;
pub type Trajectory64 = evolution::Trajectory<f64>;
pub type ProxProblem64<'a> = prox::ProxProblem<'a, f64>;
