//! Polynomial chaos expansions over the orthonormal Hermite basis:
//! coefficient estimation, analytical moments and Sobol' indices.

use crate::basis::{BasisSet, MultiIndex};
use crate::design::Design;
use crate::error::{Result, UqError};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Condition indicator above which a least-squares fit is flagged.
pub const CONDITION_WARNING: f64 = 1e10;

/// Label used for the auxiliary model-uncertainty coordinate.
pub const MODEL_UNCERTAINTY: &str = "model_uncertainty";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    LeastSquares,
    Projection,
    /// Read back from a serialized model.
    Loaded,
}

impl FitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitMethod::LeastSquares => "least_squares",
            FitMethod::Projection => "projection",
            FitMethod::Loaded => "loaded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub method: FitMethod,
    /// ‖Ψα − y‖₂ over the training points.
    pub residual_norm: f64,
    /// Ratio of the largest to smallest |Rᵢᵢ| of the QR factor (least squares only).
    pub condition: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PceModel {
    basis: BasisSet,
    coefficients: Vec<f64>,
    diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolReport {
    pub labels: Vec<String>,
    pub first_order: Vec<f64>,
    pub total_order: Vec<f64>,
    /// Share of variance carried by terms involving two or more variables.
    pub interaction_share: f64,
    pub total_variance: f64,
}

impl SobolReport {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn first_order_sum(&self) -> f64 {
        self.first_order.iter().sum()
    }

    /// CSV with header `variable,first_order,total_order`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("variable,first_order,total_order\n");
        for ((l, f), t) in self
            .labels
            .iter()
            .zip(&self.first_order)
            .zip(&self.total_order)
        {
            let _ = writeln!(s, "{l},{f:.16e},{t:.16e}");
        }
        s
    }
}

fn residual_norm(psi: &DMatrix<f64>, coefficients: &[f64], y: &[f64]) -> f64 {
    let fitted = psi * DVector::from_column_slice(coefficients);
    fitted
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl PceModel {
    pub fn new(basis: BasisSet, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(UqError::DimensionMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self {
            basis,
            coefficients,
            diagnostics: FitDiagnostics {
                method: FitMethod::Loaded,
                residual_norm: 0.0,
                condition: None,
                warnings: Vec::new(),
            },
        })
    }

    /// Ordinary least squares via Householder QR of the design matrix.
    pub fn fit_least_squares(basis: &BasisSet, points: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        let (n, terms) = (points.nrows(), basis.len());
        if y.len() != n {
            return Err(UqError::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n < terms {
            return Err(UqError::Underdetermined { points: n, terms });
        }
        let psi = basis.design_matrix(points)?;
        let qr = psi.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        let mut warnings = Vec::new();
        if condition > CONDITION_WARNING {
            warnings.push(format!(
                "design matrix is nearly rank deficient (condition indicator {condition:.3e})"
            ));
        }
        if !condition.is_finite() {
            return Err(UqError::InvalidParameter(
                "design matrix is rank deficient".into(),
            ));
        }
        let qty = qr.q().transpose() * DVector::from_column_slice(y);
        let alpha = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| UqError::InvalidParameter("singular triangular factor".into()))?;
        let coefficients: Vec<f64> = alpha.iter().copied().collect();
        let residual_norm = residual_norm(&psi, &coefficients, y);
        Ok(Self {
            basis: basis.clone(),
            coefficients,
            diagnostics: FitDiagnostics {
                method: FitMethod::LeastSquares,
                residual_norm,
                condition: Some(condition),
                warnings,
            },
        })
    }

    /// Discrete projection αₖ = Σⱼ wⱼ yⱼ ψₖ(uⱼ) on a weighted design.
    pub fn fit_projection(basis: &BasisSet, design: &Design, y: &[f64]) -> Result<Self> {
        let w = design.weights().ok_or(UqError::MissingWeights)?;
        if y.len() != design.len() {
            return Err(UqError::DimensionMismatch {
                expected: design.len(),
                got: y.len(),
            });
        }
        let psi = basis.design_matrix(design.points())?;
        let wy = DVector::from_iterator(y.len(), w.iter().zip(y).map(|(a, b)| a * b));
        let alpha = psi.transpose() * wy;
        let coefficients: Vec<f64> = alpha.iter().copied().collect();
        let residual_norm = residual_norm(&psi, &coefficients, y);
        Ok(Self {
            basis: basis.clone(),
            coefficients,
            diagnostics: FitDiagnostics {
                method: FitMethod::Projection,
                residual_norm,
                condition: None,
                warnings: Vec::new(),
            },
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        let psi = self.basis.eval(u)?;
        Ok(psi.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
    }

    pub fn moments(&self) -> Moments {
        let mean = self.coefficients[0];
        let variance: f64 = self.coefficients[1..].iter().map(|a| a * a).sum();
        Moments {
            mean,
            variance,
            std: variance.sqrt(),
        }
    }

    /// First- and total-order Sobol' indices, one entry per coordinate.
    pub fn sobol_indices(&self, labels: &[String]) -> Result<SobolReport> {
        let dim = self.basis.dim();
        if labels.len() != dim {
            return Err(UqError::DimensionMismatch {
                expected: dim,
                got: labels.len(),
            });
        }
        let variance = self.moments().variance;
        // variance at rounding level relative to the mean counts as zero
        if !(variance > (f64::EPSILON * self.coefficients[0]).powi(2)) {
            return Err(UqError::ZeroVariance);
        }
        let mut first = vec![0.0; dim];
        let mut total = vec![0.0; dim];
        let mut interaction = 0.0;
        for (m, a) in self.basis.indices().iter().zip(&self.coefficients).skip(1) {
            let share = a * a;
            let active: Vec<usize> = m.active().collect();
            match active.as_slice() {
                [] => {}
                [only] => first[*only] += share,
                _ => interaction += share,
            }
            for i in active {
                total[i] += share;
            }
        }
        Ok(SobolReport {
            labels: labels.to_vec(),
            first_order: first.iter().map(|v| v / variance).collect(),
            total_order: total.iter().map(|v| v / variance).collect(),
            interaction_share: interaction / variance,
            total_variance: variance,
        })
    }

    /// Empirical CDF of the expansion under standard normal inputs, as
    /// ascending (value, cumulative probability) pairs.
    pub fn empirical_cdf(&self, n_samples: usize, seed: u64) -> Vec<(f64, f64)> {
        let dim = self.basis.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Vec<f64>> = (0..n_samples)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let mut values: Vec<f64> = samples
            .par_iter()
            .map(|u| self.eval(u).expect("dimension checked"))
            .collect();
        values.sort_by(f64::total_cmp);
        cdf_table(values)
    }

    /// Plain-text serialization: dimension, order, then one line per term
    /// with the multi-index powers followed by the coefficient.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# polynomial chaos expansion (orthonormal Hermite)");
        let _ = writeln!(s, "dimension {}", self.basis.dim());
        let _ = writeln!(s, "max_order {}", self.basis.max_order());
        let _ = writeln!(s, "terms {}", self.basis.len());
        for (m, a) in self.basis.indices().iter().zip(&self.coefficients) {
            let powers: Vec<String> = m.powers().iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{} {:.16e}", powers.join(" "), a);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| UqError::ModelFormat(msg.to_string());
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| bad(&format!("missing `{key}`")))?;
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| bad(&format!("expected `{key}`, found `{line}`")))?;
            rest.trim()
                .parse()
                .map_err(|_| bad(&format!("invalid `{key}` value")))
        };
        let dim = header("dimension")?;
        let max_order = header("max_order")?;
        let terms = header("terms")?;
        let mut indices = Vec::with_capacity(terms);
        let mut coefficients = Vec::with_capacity(terms);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(bad(&format!(
                    "term line `{line}` has {} fields, expected {}",
                    fields.len(),
                    dim + 1
                )));
            }
            let powers = fields[..dim]
                .iter()
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("invalid multi-index power"))?;
            let a: f64 = fields[dim]
                .parse()
                .map_err(|_| bad("invalid coefficient"))?;
            indices.push(MultiIndex::new(powers));
            coefficients.push(a);
        }
        if indices.len() != terms {
            return Err(bad(&format!(
                "expected {terms} terms, found {}",
                indices.len()
            )));
        }
        let basis = BasisSet::from_indices(dim, max_order, indices)?;
        Self::new(basis, coefficients)
    }
}

/// Turns sorted values into (value, (i+1)/n) pairs.
pub fn cdf_table(sorted: Vec<f64>) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect()
}
