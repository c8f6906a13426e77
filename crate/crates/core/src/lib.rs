//! Estimator averaging for spatial point-process models.
//!
//! The weight algebra in [`averaging`] is generic over the scalar type; the
//! aliases below fix it to `f64` (and `f32` where single precision is enough).

pub mod averaging;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod summaries;

pub use error::{Error, Result};

pub type MseMatrix = averaging::MseMatrix<f64>;
pub type MseMatrix32 = averaging::MseMatrix<f32>;
pub type WeightSolution = averaging::WeightSolution<f64>;
pub type WeightSolution32 = averaging::WeightSolution<f32>;
pub type Matrix = linalg::Matrix<f64>;
