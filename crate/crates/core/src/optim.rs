//! Small bound-constrained L-BFGS used for GP hyperparameter fitting.

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            memory: 7,
            grad_tol: 1e-6,
            f_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*lo, *hi);
    }
}

/// Projected gradient with components pointing out of the box zeroed.
fn free_gradient(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

/// Minimizes `f` (returning value and gradient) inside the box [lower, upper].
///
/// Non-finite objective values are treated as +∞ and rejected by the line search.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: LbfgsOptions,
) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return Minimum {
            x,
            value: f64::INFINITY,
        };
    }
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    for _ in 0..opts.max_iter {
        let pg = free_gradient(&x, &g, lower, upper);
        if pg.iter().map(|v| v.abs()).fold(0.0, f64::max) < opts.grad_tol {
            break;
        }

        // two-loop recursion on the free gradient
        let mut q = pg.clone();
        let m = s_hist.len();
        let mut alphas = vec![0.0; m];
        for i in (0..m).rev() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            alphas[i] = rho * dot(&s_hist[i], &q);
            for k in 0..n {
                q[k] -= alphas[i] * y_hist[i][k];
            }
        }
        if m > 0 {
            let gamma = dot(&s_hist[m - 1], &y_hist[m - 1]) / dot(&y_hist[m - 1], &y_hist[m - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..m {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let beta = rho * dot(&y_hist[i], &q);
            for k in 0..n {
                q[k] += s_hist[i][k] * (alphas[i] - beta);
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        if dot(&dir, &pg) >= 0.0 {
            dir = pg.iter().map(|v| -v).collect();
            s_hist.clear();
            y_hist.clear();
        }
        if m == 0 {
            // first step: cap the move at unit length
            let norm = dot(&dir, &dir).sqrt();
            if norm > 1.0 {
                dir.iter_mut().for_each(|v| *v /= norm);
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            project(&mut trial, lower, upper);
            let (ft, gt) = f(&trial);
            let decrease: f64 = trial
                .iter()
                .zip(&x)
                .zip(&pg)
                .map(|((t, xi), gi)| (t - xi) * gi)
                .sum();
            if ft.is_finite() && ft <= fx + 1e-4 * decrease {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let converged = (fx - fn_).abs() <= opts.f_tol * fx.abs().max(1.0);
        if dot(&s, &y) > 1e-12 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        x = xn;
        fx = fn_;
        g = gn;
        if converged {
            break;
        }
    }
    Minimum { x, value: fx }
}
