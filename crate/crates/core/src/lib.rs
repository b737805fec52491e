//! Polynomial chaos propagation of coupled aleatory (input) and epistemic
//! (surrogate-model) uncertainty.
//!
//! A probabilistic surrogate returns a Gaussian prediction N(M(x), S(x)²).
//! Writing its output as Y = M(X) + U_Y·S(X) with an auxiliary standard
//! normal U_Y turns model error into one more random input. All inputs are
//! mapped to independent standard normals, a Hermite chaos expansion is fitted
//! over the n + 1 coordinates, and moments and Sobol' indices follow directly
//! from its coefficients.
//!
//! ```
//! use coupled_uq::basis::BasisSet;
//! use coupled_uq::pce::PceModel;
//!
//! let basis = BasisSet::total_degree(2, 1).unwrap();
//! let model = PceModel::new(basis, vec![1.0, 3.0, 4.0]).unwrap();
//! let m = model.moments();
//! assert_eq!((m.mean, m.std), (1.0, 5.0));
//! ```

// Published approximation constants carry full digits; `!(a < b)` is used to reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod design;
pub mod error;
pub mod input;
pub mod models;
pub mod normal;
mod optim;
pub mod pce;
pub mod pipeline;
pub mod surrogate;

pub use error::{Result, Stage, UqError};
