//! Convergence analysis for infinite and order-indexed products drawn from a
//! finite family of real square matrices.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`, with `*32` variants for single precision.

pub mod error;
pub mod contprod;
pub mod family;
pub mod gadgets;
pub mod gate;
pub mod insertion;
pub mod integral;
pub mod jsr;
pub mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type Vector = linalg::Vector<f64>;
pub type Subspace = linalg::Subspace<f64>;
pub type ToleranceConfig = linalg::ToleranceConfig<f64>;
pub type MatrixFamily = family::MatrixFamily<f64>;
pub type Verdict = family::Verdict<f64>;
pub type JsrBounds = jsr::JsrBounds<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type Vector32 = linalg::Vector<f32>;
pub type ToleranceConfig32 = linalg::ToleranceConfig<f32>;
pub type MatrixFamily32 = family::MatrixFamily<f32>;
