use coupled_uq::input::{DistributionSpec, InputSpace};
use coupled_uq::pce::MODEL_UNCERTAINTY;
use coupled_uq::pipeline::{
    coupled_sample_outputs, mcs_oracle, run_uq, DesignChoice, PceSettings, UqProblem,
};
use coupled_uq::surrogate::FnSurrogate;
use nalgebra::DMatrix;
use std::sync::Arc;

fn problem<F>(f: F, design: DesignChoice) -> UqProblem
where
    F: Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static,
{
    let inputs = InputSpace::new(vec![DistributionSpec::normal("x", 10.0, 2.0).unwrap()]).unwrap();
    UqProblem {
        surrogate: Arc::new(FnSurrogate::new(1, "analytic", f)),
        inputs,
        pce: PceSettings { order: 2, design },
    }
}

#[test]
fn heteroscedastic_error_splits_into_main_and_interaction_effects() {
    // Y = X + U_Y·aX with X = μ + σU₁:
    // Var = σ² + a²μ² + a²σ², S_UY = a²μ²/Var, interaction = a²σ²/Var
    let (mu, sigma, a) = (10.0, 2.0, 0.3);
    let var = sigma * sigma + a * a * mu * mu + a * a * sigma * sigma;
    for design in [
        DesignChoice::Tensor {
            points_per_axis: None,
        },
        DesignChoice::Smolyak { level: 2 },
    ] {
        let r = run_uq(&problem(move |x| (x[0], a * x[0]), design)).unwrap();
        assert!((r.mean - mu).abs() < 1e-10);
        assert!((r.std - var.sqrt()).abs() < 1e-10, "{}", r.std);
        let k = r.sobol.index_of(MODEL_UNCERTAINTY).unwrap();
        assert_eq!(k, 1);
        assert!((r.sobol.first_order[0] - sigma * sigma / var).abs() < 1e-12);
        assert!((r.sobol.first_order[k] - a * a * mu * mu / var).abs() < 1e-12);
        assert!((r.sobol.interaction_share - a * a * sigma * sigma / var).abs() < 1e-12);
    }
}

#[test]
fn variance_decomposes_into_model_and_surrogate_parts() {
    // constant S adds S² to the variance and nothing to the mean
    let s = 1.5;
    let r = run_uq(&problem(
        move |x| (x[0] * x[0] / 10.0, s),
        DesignChoice::Tensor {
            points_per_axis: None,
        },
    ))
    .unwrap();
    // M = X²/10 with X ~ N(10, 4): E = (100 + 4)/10, Var = (4μ²σ² + 2σ⁴)/100
    let var_m = (4.0 * 100.0 * 4.0 + 2.0 * 16.0) / 100.0;
    assert!((r.mean - 10.4).abs() < 1e-10);
    assert!((r.std.powi(2) - (var_m + s * s)).abs() < 1e-10);
    assert!((r.sobol.first_order[1] - s * s / (var_m + s * s)).abs() < 1e-12);
}

#[test]
fn sign_of_u_y_reflects_about_the_mean() {
    let p = problem(
        |x| (x[0].sin(), 0.2 + x[0].abs() * 0.01),
        DesignChoice::Lhs { n: 10, seed: 0 },
    );
    let pts = DMatrix::from_row_slice(4, 2, &[0.3, 1.2, 0.3, -1.2, -1.0, 2.0, -1.0, -2.0]);
    let y = coupled_sample_outputs(&p, &pts).unwrap();
    let m0 = (10.0f64 + 2.0 * 0.3).sin();
    let m1 = (10.0f64 - 2.0).sin();
    assert!(((y[0] + y[1]) / 2.0 - m0).abs() < 1e-14);
    assert!(((y[2] + y[3]) / 2.0 - m1).abs() < 1e-14);
}

#[test]
fn oracle_agrees_with_closed_form() {
    let (mu, sigma, a) = (10.0, 2.0, 0.3);
    let var = sigma * sigma + a * a * mu * mu + a * a * sigma * sigma;
    let o = mcs_oracle(
        &problem(
            move |x| (x[0], a * x[0]),
            DesignChoice::Smolyak { level: 1 },
        ),
        200_000,
        4,
    )
    .unwrap();
    let se = (var / 200_000.0).sqrt();
    assert!((o.mean - mu).abs() < 4.0 * se, "{}", o.mean);
    assert!((o.std / var.sqrt() - 1.0).abs() < 0.01, "{}", o.std);
}
