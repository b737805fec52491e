//! Deterministic response models used to generate surrogate training data.

use crate::surrogate::{GridSurrogate, ProbabilisticSurrogate};
use std::f64::consts::PI;

/// A deterministic simulation model y = h(x).
pub trait ResponseModel: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    fn describe(&self) -> String;
}

/// Yield margin of a shaft under combined bending and torsion.
///
/// Inputs in SI: yield strength (Pa), diameter (m), length (m), force (N),
/// torque (N·m). Output in MPa.
pub fn shaft_eval(yield_strength: f64, diameter: f64, length: f64, force: f64, torque: f64) -> f64 {
    let stress = 16.0 / (PI * diameter.powi(3))
        * (4.0 * force * force * length * length + 3.0 * torque * torque).sqrt();
    (yield_strength - stress) * 1e-6
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ShaftModel;

impl ResponseModel for ShaftModel {
    fn dim(&self) -> usize {
        5
    }

    fn eval(&self, x: &[f64]) -> f64 {
        shaft_eval(x[0], x[1], x[2], x[3], x[4])
    }

    fn describe(&self) -> String {
        "shaft yield margin (MPa)".into()
    }
}

/// Smooth synthetic stand-in for the thin-plate edge temperature, a function
/// of conductivity k, convection coefficient h, emissivity ε, ambient
/// temperature Ta (K) and plate height H (m). It has no physical fidelity and
/// exists only so plate-style configurations can be exercised end to end.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlateStandIn;

impl ResponseModel for PlateStandIn {
    fn dim(&self) -> usize {
        5
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (k, h, eps, ta, height) = (x[0], x[1], x[2], x[3], x[4]);
        ta + 150.0 * (400.0 / k).powf(0.6) * h.powf(-0.1) * (0.5 / eps).powf(0.8) / height
    }

    fn describe(&self) -> String {
        "synthetic plate stand-in".into()
    }
}

/// Uses the mean column of a tabulated grid as a deterministic model.
pub struct GridMeanModel(pub GridSurrogate);

impl ResponseModel for GridMeanModel {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0.predict(x).map(|p| p.mean).unwrap_or(f64::NAN)
    }

    fn describe(&self) -> String {
        format!("mean of {}", self.0.describe())
    }
}
