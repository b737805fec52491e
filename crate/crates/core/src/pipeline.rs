//! End-to-end propagation of coupled input and surrogate uncertainty.
//!
//! The physical inputs X are mapped to standard normal coordinates and one
//! extra standard normal coordinate U_Y carries the surrogate's predictive
//! error, so the response is Y = M(X) + U_Y·S(X) over D = n + 1 variables.

use crate::basis::BasisSet;
use crate::design::{self, Design, DesignKind};
use crate::error::{Result, Stage, UqError};
use crate::input::{Family, InputSpace};
use crate::models::ResponseModel;
use crate::pce::{cdf_table, FitMethod, Moments, PceModel, SobolReport, MODEL_UNCERTAINTY};
use crate::surrogate::{GpConfig, GpModel, ProbabilisticSurrogate};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignChoice {
    Lhs {
        n: usize,
        seed: u64,
    },
    /// `None` uses order + 1 points per axis.
    Tensor {
        points_per_axis: Option<usize>,
    },
    Smolyak {
        level: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PceSettings {
    pub order: usize,
    pub design: DesignChoice,
}

impl PceSettings {
    pub fn build_design(&self, dim: usize) -> Result<Design> {
        match self.design {
            DesignChoice::Lhs { n, seed } => design::lhs_design(n, dim, seed),
            DesignChoice::Tensor { points_per_axis } => {
                design::tensor_design(dim, points_per_axis.unwrap_or(self.order + 1))
            }
            DesignChoice::Smolyak { level } => design::smolyak_design(dim, level),
        }
    }

    pub fn describe(&self) -> String {
        match self.design {
            DesignChoice::Lhs { n, seed } => format!("lhs(n={n}, seed={seed})"),
            DesignChoice::Tensor { points_per_axis } => {
                format!(
                    "tensor(points_per_axis={})",
                    points_per_axis.unwrap_or(self.order + 1)
                )
            }
            DesignChoice::Smolyak { level } => format!("smolyak(level={level})"),
        }
    }
}

#[derive(Clone)]
pub struct UqProblem {
    pub inputs: InputSpace,
    pub surrogate: Arc<dyn ProbabilisticSurrogate>,
    pub pce: PceSettings,
}

impl UqProblem {
    /// PCE dimension n + 1; the last coordinate is U_Y.
    pub fn dim(&self) -> usize {
        self.inputs.dim() + 1
    }

    /// Input names followed by the model-uncertainty label.
    pub fn labels(&self) -> Vec<String> {
        let mut labels = self.inputs.names();
        labels.push(MODEL_UNCERTAINTY.to_string());
        labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub design: String,
    pub design_kind: DesignKind,
    pub n_points: usize,
    pub fit_method: FitMethod,
    pub order: usize,
    pub surrogate: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub mean: f64,
    pub std: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Ascending (value, cumulative probability) pairs.
    pub cdf: Vec<(f64, f64)>,
}

impl OracleResult {
    /// Empirical quantile by nearest rank.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.cdf.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.cdf[idx].0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub oracle_mean: f64,
    pub oracle_std: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// (PCE − oracle) / oracle.
    pub mean_rel_error: f64,
    pub std_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UqResult {
    pub pce: PceModel,
    pub mean: f64,
    pub std: f64,
    pub sobol: SobolReport,
    pub oracle: Option<OracleComparison>,
    pub provenance: Provenance,
}

impl UqResult {
    pub fn moments(&self) -> Moments {
        self.pce.moments()
    }

    pub fn attach_oracle(&mut self, oracle: &OracleResult) {
        self.oracle = Some(OracleComparison {
            oracle_mean: oracle.mean,
            oracle_std: oracle.std,
            n_samples: oracle.n_samples,
            seed: oracle.seed,
            mean_rel_error: (self.mean - oracle.mean) / oracle.mean,
            std_rel_error: (self.std - oracle.std) / oracle.std,
        });
    }
}

/// Responses Y = M(x) + u_Y·S(x) at each design row (last column is u_Y).
pub fn coupled_sample_outputs(problem: &UqProblem, points: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = problem.dim();
    if points.ncols() != dim {
        return Err(UqError::DimensionMismatch {
            expected: dim,
            got: points.ncols(),
        });
    }
    let n = problem.inputs.dim();
    (0..points.nrows())
        .into_par_iter()
        .map(|j| {
            let row: Vec<f64> = points.row(j).iter().copied().collect();
            let x = problem.inputs.u_to_x(&row[..n])?;
            let p = problem.surrogate.predict(&x)?;
            Ok(p.mean + row[n] * p.std)
        })
        .collect()
}

/// Design → coupled outputs → fit → moments → Sobol' indices.
///
/// Quadrature designs are fitted by discrete projection, LHS designs by
/// least squares.
pub fn run_uq(problem: &UqProblem) -> Result<UqResult> {
    let dim = problem.dim();
    let design = problem
        .pce
        .build_design(dim)
        .map_err(UqError::at(Stage::Design))?;
    let y =
        coupled_sample_outputs(problem, design.points()).map_err(UqError::at(Stage::Sampling))?;
    let basis = BasisSet::total_degree(dim, problem.pce.order).map_err(UqError::at(Stage::Fit))?;
    let pce = match design.kind() {
        DesignKind::Lhs => PceModel::fit_least_squares(&basis, design.points(), &y),
        DesignKind::TensorQuadrature | DesignKind::Smolyak => {
            PceModel::fit_projection(&basis, &design, &y)
        }
    }
    .map_err(UqError::at(Stage::Fit))?;
    let m = pce.moments();
    let sobol = pce
        .sobol_indices(&problem.labels())
        .map_err(UqError::at(Stage::Sensitivity))?;
    let provenance = Provenance {
        design: problem.pce.describe(),
        design_kind: design.kind(),
        n_points: design.len(),
        fit_method: pce.diagnostics().method,
        order: problem.pce.order,
        surrogate: problem.surrogate.describe(),
    };
    Ok(UqResult {
        mean: m.mean,
        std: m.std,
        pce,
        sobol,
        oracle: None,
        provenance,
    })
}

/// Direct Monte Carlo over native input draws and an independent U_Y.
pub fn mcs_oracle(problem: &UqProblem, n_samples: usize, seed: u64) -> Result<OracleResult> {
    if n_samples < 2 {
        return Err(UqError::InvalidParameter(
            "oracle needs at least two samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(Vec<f64>, f64)> = (0..n_samples)
        .map(|_| {
            let x = problem.inputs.sample(&mut rng);
            let uy: f64 = StandardNormal.sample(&mut rng);
            (x, uy)
        })
        .collect();
    let mut values: Vec<f64> = draws
        .par_iter()
        .map(|(x, uy)| {
            let p = problem.surrogate.predict(x)?;
            Ok(p.mean + uy * p.std)
        })
        .collect::<Result<_>>()
        .map_err(UqError::at(Stage::Oracle))?;
    let n = n_samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    values.sort_by(f64::total_cmp);
    Ok(OracleResult {
        mean,
        std: var.sqrt(),
        n_samples,
        seed,
        cdf: cdf_table(values),
    })
}

/// How surrogate training data is drawn from a response model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPlan {
    pub n_train: usize,
    /// Half-width of the sampling box in standard deviations.
    pub box_sigmas: f64,
    /// Seed of the Latin hypercube over the box.
    pub seed: u64,
    pub gp: GpConfig,
}

impl Default for TrainingPlan {
    fn default() -> Self {
        Self {
            n_train: 100,
            box_sigmas: 4.0,
            seed: 0,
            gp: GpConfig::default(),
        }
    }
}

/// Physical box mean ± k·std per input, truncated to each marginal's support.
pub fn training_box(space: &InputSpace, sigmas: f64) -> Vec<(f64, f64)> {
    space
        .marginals()
        .iter()
        .map(|m| {
            let (lo_s, hi_s) = m.support();
            let mut lo = (m.mean() - sigmas * m.std()).max(lo_s);
            let hi = (m.mean() + sigmas * m.std()).min(hi_s);
            if m.family() == Family::Lognormal && lo <= 0.0 {
                lo = m.from_standard_normal(-sigmas);
            }
            (lo, hi)
        })
        .collect()
}

/// Seeded Latin hypercube over the training box (m × n, physical units).
pub fn training_inputs(space: &InputSpace, m: usize, sigmas: f64, seed: u64) -> DMatrix<f64> {
    let bounds = training_box(space, sigmas);
    let unit = design::lhs_unit(m, space.dim(), seed);
    DMatrix::from_fn(m, space.dim(), |i, d| {
        let (lo, hi) = bounds[d];
        lo + unit[(i, d)] * (hi - lo)
    })
}

#[derive(Debug, Clone)]
pub struct TrainingData {
    pub inputs: DMatrix<f64>,
    pub outputs: Vec<f64>,
}

impl TrainingData {
    /// CSV `x1,…,xn,y` at 17 significant digits.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let n = self.inputs.ncols();
        let mut s: String = (1..=n).map(|d| format!("x{d},")).collect();
        s.push_str("y\n");
        for (i, y) in self.outputs.iter().enumerate() {
            for d in 0..n {
                let _ = write!(s, "{:.16e},", self.inputs[(i, d)]);
            }
            let _ = writeln!(s, "{y:.16e}");
        }
        s
    }
}

/// Samples the response model on the training box and fits a GP to it.
pub fn train_gp(
    model: &dyn ResponseModel,
    space: &InputSpace,
    plan: &TrainingPlan,
) -> Result<(GpModel, TrainingData)> {
    if model.dim() != space.dim() {
        return Err(UqError::DimensionMismatch {
            expected: space.dim(),
            got: model.dim(),
        });
    }
    let inputs = training_inputs(space, plan.n_train, plan.box_sigmas, plan.seed);
    let outputs: Vec<f64> = (0..inputs.nrows())
        .map(|i| {
            let x: Vec<f64> = inputs.row(i).iter().copied().collect();
            model.eval(&x)
        })
        .collect();
    let gp = GpModel::train(&inputs, &outputs, &plan.gp).map_err(UqError::at(Stage::Training))?;
    Ok((gp, TrainingData { inputs, outputs }))
}

#[derive(Debug)]
pub struct StudyEntry {
    pub size: usize,
    pub result: Result<UqResult>,
}

/// Retrains the surrogate at each training size and reruns the propagation;
/// failures at one size are recorded and the study continues.
pub fn training_size_study(
    model: &dyn ResponseModel,
    space: &InputSpace,
    sizes: &[usize],
    pce: &PceSettings,
    plan: &TrainingPlan,
) -> Vec<StudyEntry> {
    sizes
        .iter()
        .map(|&size| {
            let plan = TrainingPlan {
                n_train: size,
                ..plan.clone()
            };
            let result = train_gp(model, space, &plan).and_then(|(gp, _)| {
                let problem = UqProblem {
                    inputs: space.clone(),
                    surrogate: Arc::new(gp),
                    pce: pce.clone(),
                };
                run_uq(&problem)
            });
            StudyEntry { size, result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::DistributionSpec;
    use crate::surrogate::FnSurrogate;
    use approx::assert_relative_eq;

    fn space1() -> InputSpace {
        InputSpace::new(vec![DistributionSpec::normal("a", 3.0, 2.0).unwrap()]).unwrap()
    }

    fn problem_with<F>(space: InputSpace, f: F, design: DesignChoice) -> UqProblem
    where
        F: Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static,
    {
        UqProblem {
            surrogate: Arc::new(FnSurrogate::new(space.dim(), "test", f)),
            inputs: space,
            pce: PceSettings { order: 2, design },
        }
    }

    #[test]
    fn coupled_outputs_follow_the_affine_rule() {
        let p = problem_with(
            space1(),
            |x| (x[0] * 2.0, 0.5 + x[0].abs()),
            DesignChoice::Smolyak { level: 1 },
        );
        let pts = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 1.5, 1.0, -1.5]);
        let y = coupled_sample_outputs(&p, &pts).unwrap();
        assert_eq!(y[0], 6.0);
        let x = 5.0;
        let (m, s) = (2.0 * x, 0.5 + x);
        assert_relative_eq!(y[1], m + 1.5 * s, epsilon = 1e-12);
        assert_relative_eq!(0.5 * (y[1] + y[2]), m, epsilon = 1e-12);
        assert!(coupled_sample_outputs(&p, &DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn zero_std_ignores_uy_column() {
        let p = problem_with(
            space1(),
            |x| (x[0].powi(2), 0.0),
            DesignChoice::Smolyak { level: 1 },
        );
        let a = coupled_sample_outputs(&p, &DMatrix::from_row_slice(1, 2, &[0.7, -2.0])).unwrap();
        let b = coupled_sample_outputs(&p, &DMatrix::from_row_slice(1, 2, &[0.7, 3.0])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_linear_model_is_all_input() {
        let p = problem_with(
            space1(),
            |x| (x[0], 0.0),
            DesignChoice::Tensor {
                points_per_axis: None,
            },
        );
        let r = run_uq(&p).unwrap();
        assert_relative_eq!(r.mean, 3.0, epsilon = 1e-12);
        assert_relative_eq!(r.std, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.sobol.first_order[0], 1.0, epsilon = 1e-12);
        assert!(r.sobol.first_order[1] < 1e-28);
        assert_eq!(
            r.sobol.labels,
            vec!["a".to_string(), MODEL_UNCERTAINTY.to_string()]
        );
        assert_eq!(r.provenance.fit_method, FitMethod::Projection);
    }

    #[test]
    fn constant_mean_with_noise_is_all_model_uncertainty() {
        let p = problem_with(
            space1(),
            |_| (4.0, 1.5),
            DesignChoice::Lhs { n: 30, seed: 2 },
        );
        let r = run_uq(&p).unwrap();
        assert_relative_eq!(r.sobol.first_order[1], 1.0, epsilon = 1e-12);
        assert!(r.sobol.first_order[0].abs() < 1e-12);
        assert_relative_eq!(r.std, 1.5, epsilon = 1e-12);
        assert_eq!(r.provenance.fit_method, FitMethod::LeastSquares);
    }

    #[test]
    fn stage_errors_are_labelled() {
        let p = problem_with(
            space1(),
            |x| (x[0], 0.0),
            DesignChoice::Smolyak { level: 5 },
        );
        let err = run_uq(&p).unwrap_err();
        assert!(
            matches!(
                err,
                UqError::Stage {
                    stage: Stage::Design,
                    ..
                }
            ),
            "{err}"
        );
        let p = problem_with(
            space1(),
            |x| (x[0], 0.0),
            DesignChoice::Lhs { n: 3, seed: 1 },
        );
        let err = run_uq(&p).unwrap_err();
        assert!(matches!(
            err,
            UqError::Stage {
                stage: Stage::Fit,
                ..
            }
        ));
        let p = problem_with(space1(), |_| (1.0, 0.0), DesignChoice::Smolyak { level: 1 });
        assert!(matches!(
            run_uq(&p).unwrap_err(),
            UqError::Stage {
                stage: Stage::Sensitivity,
                ..
            }
        ));
    }

    #[test]
    fn oracle_closed_form_linear_case() {
        let p = problem_with(
            space1(),
            |x| (x[0], 0.0),
            DesignChoice::Smolyak { level: 1 },
        );
        let o = mcs_oracle(&p, 100_000, 5).unwrap();
        let se = 2.0 / (1e5f64).sqrt();
        assert!((o.mean - 3.0).abs() < 4.0 * se);
        assert!((o.std - 2.0).abs() < 0.02);
        assert_eq!(o, mcs_oracle(&p, 100_000, 5).unwrap());
        assert!(o.cdf.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn training_box_truncates_lognormal() {
        let space = InputSpace::new(vec![
            DistributionSpec::lognormal("f", 1.0, 0.5).unwrap(),
            DistributionSpec::uniform("g", 0.0, 1.0).unwrap(),
        ])
        .unwrap();
        let b = training_box(&space, 4.0);
        assert!(b[0].0 > 0.0);
        assert_relative_eq!(b[0].1, 3.0);
        let half = 3f64.sqrt();
        assert_relative_eq!(b[1].0, -half, epsilon = 1e-15);
        assert_relative_eq!(b[1].1, half, epsilon = 1e-15);
    }

    #[test]
    fn training_csv_layout() {
        let data = TrainingData {
            inputs: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            outputs: vec![0.5, -0.25],
        };
        let csv = data.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x1,x2,y");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1.0000000000000000e0,"));
    }
}
