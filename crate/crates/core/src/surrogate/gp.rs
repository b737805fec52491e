//! Zero-mean Gaussian process regression with an anisotropic squared
//! exponential kernel.
//!
//! Inputs are standardized per dimension and outputs centered and scaled.
//! The signal variance is profiled out of the likelihood, so only the
//! log length-scales are optimized (multi-start L-BFGS, seeded).

use super::{Prediction, ProbabilisticSurrogate};
use crate::error::{Result, UqError};
use crate::optim::{self, LbfgsOptions};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    /// Relative jitter floor added to the correlation diagonal.
    pub jitter: f64,
    /// Largest jitter tried before giving up on a factorization.
    pub max_jitter: f64,
    /// Number of optimizer starts (the first always starts at unit length-scales).
    pub restarts: usize,
    pub seed: u64,
    /// Bounds on standardized length-scales.
    pub length_scale_bounds: (f64, f64),
    pub max_iter: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            jitter: 1e-10,
            max_jitter: 1e-6,
            restarts: 8,
            seed: 0,
            length_scale_bounds: (1e-2, 1e2),
            max_iter: 100,
        }
    }
}

/// Fitted hyperparameters, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyperparameters {
    pub length_scales: Vec<f64>,
    pub signal_std: f64,
    pub jitter: f64,
    pub log_marginal_likelihood: f64,
}

#[derive(Debug, Clone)]
pub struct GpModel {
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    /// Standardized training inputs, row-major m × n.
    xs: Vec<f64>,
    m: usize,
    n: usize,
    /// Standardized length-scales.
    ell: Vec<f64>,
    /// Profiled signal variance of the standardized outputs.
    sigma2: f64,
    jitter: f64,
    /// R⁻¹ y for the standardized outputs.
    alpha: Vec<f64>,
    /// Cholesky factor of R, row-major.
    chol: Vec<f64>,
    log_likelihood: f64,
    /// Set when the outputs are constant; the model then returns that value with zero std.
    constant: bool,
}

struct Standardized {
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    constant: bool,
}

fn standardize(inputs: &DMatrix<f64>, outputs: &[f64]) -> Result<Standardized> {
    let (m, n) = inputs.shape();
    if outputs.len() != m {
        return Err(UqError::DimensionMismatch {
            expected: m,
            got: outputs.len(),
        });
    }
    if m < 2 * n || m < 2 {
        return Err(UqError::DegenerateData(format!(
            "{m} training points for {n} inputs (need at least {})",
            (2 * n).max(2)
        )));
    }
    if inputs.iter().chain(outputs).any(|v| !v.is_finite()) {
        return Err(UqError::DegenerateData("non-finite training value".into()));
    }
    for i in 0..m {
        for j in 0..i {
            if inputs.row(i) == inputs.row(j) {
                return Err(UqError::DegenerateData(format!(
                    "duplicate training inputs at rows {j} and {i}"
                )));
            }
        }
    }
    let mut x_mean = vec![0.0; n];
    let mut x_scale = vec![1.0; n];
    for d in 0..n {
        let col = inputs.column(d);
        let mean = col.sum() / m as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        x_mean[d] = mean;
        if var > 0.0 {
            x_scale[d] = var.sqrt();
        }
    }
    let mut xs = vec![0.0; m * n];
    for i in 0..m {
        for d in 0..n {
            xs[i * n + d] = (inputs[(i, d)] - x_mean[d]) / x_scale[d];
        }
    }
    let y_mean = outputs.iter().sum::<f64>() / m as f64;
    let y_var = outputs.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let constant = !(y_var > 0.0);
    let y_scale = if constant { 1.0 } else { y_var.sqrt() };
    let ys = outputs.iter().map(|v| (v - y_mean) / y_scale).collect();
    Ok(Standardized {
        x_mean,
        x_scale,
        y_mean,
        y_scale,
        xs,
        ys,
        constant,
    })
}

/// Squared coordinate differences, one m × m block per input dimension.
fn squared_differences(xs: &[f64], m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|d| {
            let mut block = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..i {
                    let diff = xs[i * n + d] - xs[j * n + d];
                    block[i * m + j] = diff * diff;
                    block[j * m + i] = diff * diff;
                }
            }
            block
        })
        .collect()
}

fn correlation(diff2: &[Vec<f64>], ell: &[f64], m: usize) -> DMatrix<f64> {
    let inv: Vec<f64> = ell.iter().map(|l| 0.5 / (l * l)).collect();
    DMatrix::from_fn(m, m, |i, j| {
        let s: f64 = diff2.iter().zip(&inv).map(|(b, w)| b[i * m + j] * w).sum();
        (-s).exp()
    })
}

/// Factorizes R + ηI, escalating η by decades from `floor` up to `max`.
fn factorize(
    r: &DMatrix<f64>,
    floor: f64,
    max: f64,
) -> Option<(Cholesky<f64, nalgebra::Dyn>, f64)> {
    let mut jitter = floor;
    loop {
        let mut k = r.clone();
        for i in 0..k.nrows() {
            k[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(k) {
            return Some((c, jitter));
        }
        if jitter >= max {
            return None;
        }
        jitter = (jitter * 10.0).min(max);
    }
}

struct Fit {
    chol: Cholesky<f64, nalgebra::Dyn>,
    jitter: f64,
    alpha: DVector<f64>,
    sigma2: f64,
    /// Negative profiled log marginal likelihood (up to constants).
    objective: f64,
}

fn fit_at(
    diff2: &[Vec<f64>],
    ys: &DVector<f64>,
    ell: &[f64],
    cfg: &GpConfig,
) -> Option<(Fit, DMatrix<f64>)> {
    let m = ys.len();
    let r = correlation(diff2, ell, m);
    let (chol, jitter) = factorize(&r, cfg.jitter, cfg.max_jitter)?;
    let alpha = chol.solve(ys);
    let sigma2 = ys.dot(&alpha) / m as f64;
    if !(sigma2 > 0.0) {
        return None;
    }
    let log_det: f64 = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|v| v.ln())
        .sum::<f64>()
        * 2.0;
    let objective = 0.5 * m as f64 * sigma2.ln() + 0.5 * log_det;
    Some((
        Fit {
            chol,
            jitter,
            alpha,
            sigma2,
            objective,
        },
        r,
    ))
}

fn best_start(
    diff2: &[Vec<f64>],
    ys: &DVector<f64>,
    starts: &[Vec<f64>],
    lower: &[f64],
    upper: &[f64],
    opts: LbfgsOptions,
    cfg: &GpConfig,
) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in starts {
        let res = optim::minimize(
            |x| objective_and_gradient(diff2, ys, x, cfg),
            x0,
            lower,
            upper,
            opts,
        );
        if res.value.is_finite() && best.as_ref().is_none_or(|(v, _)| res.value < *v) {
            best = Some((res.value, res.x));
        }
    }
    best
}

/// R⁻¹ = L⁻ᵀ L⁻¹ from the lower Cholesky factor. Only the lower triangle of
/// `l` is read.
fn inverse_from_factor(l: &DMatrix<f64>) -> DMatrix<f64> {
    let m = l.nrows();
    let mut linv = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut col = linv.column_mut(j);
        col[j] = 1.0;
        for k in j..m {
            let xk = col[k] / l[(k, k)];
            col[k] = xk;
            if xk != 0.0 {
                for i in k + 1..m {
                    col[i] -= xk * l[(i, k)];
                }
            }
        }
    }
    linv.transpose() * &linv
}

fn objective_and_gradient(
    diff2: &[Vec<f64>],
    ys: &DVector<f64>,
    log_ell: &[f64],
    cfg: &GpConfig,
) -> (f64, Vec<f64>) {
    let ell: Vec<f64> = log_ell.iter().map(|v| v.exp()).collect();
    let m = ys.len();
    let Some((fit, r)) = fit_at(diff2, ys, &ell, cfg) else {
        return (f64::INFINITY, vec![0.0; ell.len()]);
    };
    // d obj / d log ell_d = 1/2 Σ_ij W_ij ∂R_ij, W = R⁻¹ − αα ᵀ/σ²
    let mut w = inverse_from_factor(fit.chol.l_dirty());
    for j in 0..m {
        for i in 0..m {
            w[(i, j)] -= fit.alpha[i] * fit.alpha[j] / fit.sigma2;
        }
    }
    let grad = ell
        .iter()
        .enumerate()
        .map(|(d, l)| {
            let block = &diff2[d];
            let mut acc = 0.0;
            for j in 0..m {
                for i in 0..m {
                    // blocks are symmetric, so index them column-major too
                    acc += w[(i, j)] * r[(i, j)] * block[j * m + i];
                }
            }
            0.5 * acc / (l * l)
        })
        .collect();
    (fit.objective, grad)
}

impl GpModel {
    /// Trains on `inputs` (m × n, physical units) and `outputs` (length m),
    /// maximizing the marginal likelihood over length-scales.
    pub fn train(inputs: &DMatrix<f64>, outputs: &[f64], cfg: &GpConfig) -> Result<Self> {
        let st = standardize(inputs, outputs)?;
        let (m, n) = inputs.shape();
        if st.constant {
            return Self::assemble(st, m, n, vec![1.0; n], cfg);
        }
        let diff2 = squared_differences(&st.xs, m, n);
        let ys = DVector::from_vec(st.ys.clone());
        let (lo, hi) = cfg.length_scale_bounds;
        let lower = vec![lo.ln(); n];
        let upper = vec![hi.ln(); n];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let opts = LbfgsOptions {
            max_iter: cfg.max_iter,
            ..Default::default()
        };

        let starts: Vec<Vec<f64>> = (0..cfg.restarts.max(1))
            .map(|start| {
                if start == 0 {
                    vec![0.0; n]
                } else {
                    (0..n)
                        .map(|_| rng.random_range((0.1f64).ln()..(10f64).ln()))
                        .collect()
                }
            })
            .collect();
        // Search with the jitter pinned at its floor so that nearly singular
        // correlation matrices are rejected rather than regularized; only if
        // no start is feasible is escalation allowed during the search.
        let floor_only = GpConfig {
            max_jitter: cfg.jitter,
            ..cfg.clone()
        };
        let mut best = None;
        for search_cfg in [&floor_only, cfg] {
            best = best_start(&diff2, &ys, &starts, &lower, &upper, opts, search_cfg);
            if best.is_some() {
                break;
            }
        }
        let Some((_, log_ell)) = best else {
            return Err(UqError::NotPositiveDefinite(cfg.max_jitter));
        };
        let ell = log_ell.iter().map(|v| v.exp()).collect();
        Self::assemble(st, m, n, ell, cfg)
    }

    /// Conditions on the data at fixed hyperparameters (length-scales in
    /// physical units), without optimization.
    pub fn with_length_scales(
        inputs: &DMatrix<f64>,
        outputs: &[f64],
        length_scales: &[f64],
        cfg: &GpConfig,
    ) -> Result<Self> {
        let st = standardize(inputs, outputs)?;
        let (m, n) = inputs.shape();
        if length_scales.len() != n {
            return Err(UqError::DimensionMismatch {
                expected: n,
                got: length_scales.len(),
            });
        }
        let ell = length_scales
            .iter()
            .zip(&st.x_scale)
            .map(|(l, s)| l / s)
            .collect();
        Self::assemble(st, m, n, ell, cfg)
    }

    fn assemble(
        st: Standardized,
        m: usize,
        n: usize,
        ell: Vec<f64>,
        cfg: &GpConfig,
    ) -> Result<Self> {
        let diff2 = squared_differences(&st.xs, m, n);
        let ys = DVector::from_vec(st.ys.clone());
        let (chol, jitter, alpha, sigma2, objective) = if st.constant {
            let r = correlation(&diff2, &ell, m);
            let (chol, jitter) = factorize(&r, cfg.jitter, cfg.max_jitter)
                .ok_or(UqError::NotPositiveDefinite(cfg.max_jitter))?;
            (chol, jitter, DVector::zeros(m), 0.0, 0.0)
        } else {
            let (fit, _) = fit_at(&diff2, &ys, &ell, cfg)
                .ok_or(UqError::NotPositiveDefinite(cfg.max_jitter))?;
            (fit.chol, fit.jitter, fit.alpha, fit.sigma2, fit.objective)
        };
        let l = chol.l();
        let mut rows = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..=i {
                rows[i * m + k] = l[(i, k)];
            }
        }
        let log_likelihood = -objective
            - 0.5 * m as f64 * (1.0 + (2.0 * std::f64::consts::PI).ln())
            - m as f64 * st.y_scale.ln();
        Ok(Self {
            x_mean: st.x_mean,
            x_scale: st.x_scale,
            y_mean: st.y_mean,
            y_scale: st.y_scale,
            xs: st.xs,
            m,
            n,
            ell,
            sigma2,
            jitter,
            alpha: alpha.iter().copied().collect(),
            chol: rows,
            log_likelihood,
            constant: st.constant,
        })
    }

    pub fn hyperparameters(&self) -> GpHyperparameters {
        GpHyperparameters {
            length_scales: self
                .ell
                .iter()
                .zip(&self.x_scale)
                .map(|(l, s)| l * s)
                .collect(),
            signal_std: self.sigma2.sqrt() * self.y_scale,
            jitter: self.jitter,
            log_marginal_likelihood: self.log_likelihood,
        }
    }

    pub fn n_train(&self) -> usize {
        self.m
    }

    fn predict_standardized(&self, x: &[f64]) -> (f64, f64) {
        let (m, n) = (self.m, self.n);
        let z: Vec<f64> = x
            .iter()
            .zip(self.x_mean.iter().zip(&self.x_scale))
            .map(|(v, (mu, s))| (v - mu) / s)
            .collect();
        let inv: Vec<f64> = self.ell.iter().map(|l| 0.5 / (l * l)).collect();
        let k: Vec<f64> = (0..m)
            .map(|i| {
                let row = &self.xs[i * n..(i + 1) * n];
                let s: f64 = row
                    .iter()
                    .zip(&z)
                    .zip(&inv)
                    .map(|((a, b), w)| (a - b).powi(2) * w)
                    .sum();
                (-s).exp()
            })
            .collect();
        let mean: f64 = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        // forward substitution L v = k
        let mut v = vec![0.0; m];
        for i in 0..m {
            let row = &self.chol[i * m..i * m + i];
            let s: f64 = row.iter().zip(&v[..i]).map(|(a, b)| a * b).sum();
            v[i] = (k[i] - s) / self.chol[i * m + i];
        }
        let explained: f64 = v.iter().map(|a| a * a).sum();
        let var = self.sigma2 * (1.0 - explained);
        (mean, var.max(0.0))
    }
}

impl ProbabilisticSurrogate for GpModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.n {
            return Err(UqError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if self.constant {
            return Ok(Prediction {
                mean: self.y_mean,
                std: 0.0,
            });
        }
        let (mean, var) = self.predict_standardized(x);
        Ok(Prediction {
            mean: self.y_mean + self.y_scale * mean,
            std: self.y_scale * var.sqrt(),
        })
    }

    fn describe(&self) -> String {
        let h = self.hyperparameters();
        format!(
            "gaussian process (squared exponential, m={}, length_scales={:?}, signal_std={:e}, jitter={:e})",
            self.m, h.length_scales, h.signal_std, h.jitter
        )
    }
}
