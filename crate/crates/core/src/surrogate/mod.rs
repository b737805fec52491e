//! Probabilistic surrogates: anything that returns a Gaussian predictive
//! mean and standard deviation at a physical input.

mod gp;
mod grid;

pub use gp::{GpConfig, GpHyperparameters, GpModel};
pub use grid::GridSurrogate;

use crate::error::{Result, UqError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

/// Predictive mean M(x) and standard deviation S(x) ≥ 0 of a surrogate model.
pub trait ProbabilisticSurrogate: Send + Sync {
    /// Number of physical inputs.
    fn dim(&self) -> usize;

    fn predict(&self, x: &[f64]) -> Result<Prediction>;

    /// Short human-readable description for reports.
    fn describe(&self) -> String;
}

/// Surrogate backed by a plain function, handy for injecting exact models.
pub struct FnSurrogate<F> {
    dim: usize,
    f: F,
    label: String,
}

impl<F> FnSurrogate<F>
where
    F: Fn(&[f64]) -> (f64, f64) + Send + Sync,
{
    pub fn new(dim: usize, label: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            f,
            label: label.into(),
        }
    }
}

impl<F> ProbabilisticSurrogate for FnSurrogate<F>
where
    F: Fn(&[f64]) -> (f64, f64) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.dim {
            return Err(UqError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let (mean, std) = (self.f)(x);
        Ok(Prediction {
            mean,
            std: std.max(0.0),
        })
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}
