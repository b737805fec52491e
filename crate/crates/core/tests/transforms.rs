use coupled_uq::input::{DistributionSpec, Family};
use coupled_uq::normal;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

const EULER: f64 = 0.577_215_664_901_532_9;

fn specs() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::normal("sy", 250.0, 30.0).unwrap(),
        DistributionSpec::lognormal("force", 1780.0, 363.0).unwrap(),
        DistributionSpec::uniform("u", 10.0, 2.0).unwrap(),
        DistributionSpec::gumbel_max("torque", 430.0, 40.0).unwrap(),
    ]
}

/// Closed-form CDF built from (mean, std) without going through the crate's
/// parameter conversion.
fn reference_cdf(family: Family, mean: f64, std: f64, x: f64) -> f64 {
    match family {
        Family::Normal => normal::cdf((x - mean) / std),
        Family::Lognormal => {
            if x <= 0.0 {
                return 0.0;
            }
            let z2 = (1.0 + (std / mean).powi(2)).ln();
            let lambda = mean.ln() - z2 / 2.0;
            normal::cdf((x.ln() - lambda) / z2.sqrt())
        }
        Family::Uniform => {
            let half = 3f64.sqrt() * std;
            ((x - (mean - half)) / (2.0 * half)).clamp(0.0, 1.0)
        }
        Family::GumbelMax => {
            let beta = std * 6f64.sqrt() / PI;
            let mu = mean - EULER * beta;
            (-(-(x - mu) / beta).exp()).exp()
        }
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

// Asymptotic Kolmogorov critical value at α = 0.001.
fn ks_critical(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}

#[test]
fn native_sampler_passes_ks() {
    let n = 100_000;
    for (k, spec) in specs().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11 + k as u64);
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
        let d = ks_statistic(xs, |x| {
            reference_cdf(spec.family(), spec.mean(), spec.std(), x)
        });
        assert!(d < ks_critical(n), "{:?}: D = {d}", spec.family());
    }
}

#[test]
fn standard_normal_image_passes_ks() {
    let n = 100_000;
    for (k, spec) in specs().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(101 + k as u64);
        let xs: Vec<f64> = (0..n)
            .map(|_| spec.from_standard_normal(StandardNormal.sample(&mut rng)))
            .collect();
        let d = ks_statistic(xs, |x| {
            reference_cdf(spec.family(), spec.mean(), spec.std(), x)
        });
        assert!(d < ks_critical(n), "{:?}: D = {d}", spec.family());
    }
}

#[test]
fn skewed_families_match_moments() {
    let n = 1_000_000;
    for spec in [
        DistributionSpec::lognormal("force", 1780.0, 363.0).unwrap(),
        DistributionSpec::gumbel_max("torque", 430.0, 40.0).unwrap(),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(
            (mean / spec.mean() - 1.0).abs() < 0.01,
            "{:?} mean {mean}",
            spec.family()
        );
        assert!(
            (var.sqrt() / spec.std() - 1.0).abs() < 0.01,
            "{:?} std {}",
            spec.family(),
            var.sqrt()
        );
    }
}

#[test]
fn cdf_matches_closed_form() {
    for spec in specs() {
        for u in [-4.0, -1.5, 0.0, 0.7, 3.0] {
            let x = spec.from_standard_normal(u);
            let want = reference_cdf(spec.family(), spec.mean(), spec.std(), x);
            assert!(
                (spec.cdf(x) - want).abs() < 1e-12,
                "{:?} at {x}",
                spec.family()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn u_round_trips_through_physical_space(u in -5.0f64..5.0, which in 0usize..4) {
        let spec = &specs()[which];
        let x = spec.from_standard_normal(u);
        let back = spec.to_standard_normal(x).unwrap();
        prop_assert!((back - u).abs() < 1e-8, "{:?}: {u} -> {x} -> {back}", spec.family());
    }

    #[test]
    fn transform_is_monotone(a in -5.0f64..5.0, b in -5.0f64..5.0, which in 0usize..4) {
        let spec = &specs()[which];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(spec.from_standard_normal(lo) <= spec.from_standard_normal(hi));
    }

    #[test]
    fn arbitrary_moments_round_trip(mean in 1.0f64..1e3, cv in 0.01f64..0.5, u in -5.0f64..5.0, which in 0usize..4) {
        let family = [Family::Normal, Family::Lognormal, Family::Uniform, Family::GumbelMax][which];
        let spec = DistributionSpec::new("x", family, mean, cv * mean).unwrap();
        let x = spec.from_standard_normal(u);
        let back = spec.to_standard_normal(x).unwrap();
        prop_assert!((back - u).abs() < 1e-8);
    }
}
