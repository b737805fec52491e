use coupled_uq::basis::{hermite_1d, BasisSet};
use coupled_uq::design::{gauss_hermite_1d, lhs_design, smolyak_design, tensor_design};
use coupled_uq::normal;
use proptest::prelude::*;

/// E[U^k] for a standard normal: (k−1)!! for even k, 0 for odd k.
fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(f64::from).product()
}

/// Monomial coefficients of He_n from the three-term recurrence, in exact
/// integer arithmetic.
fn hermite_coefficients(n: usize) -> Vec<i128> {
    let mut prev = vec![1i128];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0i128, 1];
    for j in 1..n {
        let mut next = vec![0i128; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= j as i128 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

#[test]
fn three_point_rule() {
    let (x, w) = gauss_hermite_1d(3).unwrap();
    let s3 = 3f64.sqrt();
    for (got, want) in x.iter().zip([-s3, 0.0, s3]) {
        assert!((got - want).abs() < 1e-12, "{x:?}");
    }
    for (got, want) in w.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
        assert!((got - want).abs() < 1e-12, "{w:?}");
    }
}

#[test]
fn five_point_rule_eighth_moment() {
    let (x, w) = gauss_hermite_1d(5).unwrap();
    let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
    assert!((m8 - 105.0).abs() < 1e-9, "{m8}");
}

#[test]
fn rules_reach_their_degree_of_exactness() {
    for n in 1..=12 {
        let (x, w) = gauss_hermite_1d(n).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        for k in 0..(2 * n as u32) {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            // odd moments cancel, so measure error against the absolute sum
            let scale: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.abs().powi(k as i32))
                .sum();
            let want = normal_moment(k);
            assert!(
                (got - want).abs() <= 1e-12 * scale.max(1.0),
                "n={n} k={k}: {got} vs {want}"
            );
        }
        for i in 0..n {
            assert!((x[i] + x[n - 1 - i]).abs() < 1e-12);
            assert!((w[i] - w[n - 1 - i]).abs() < 1e-14);
        }
    }
}

#[test]
fn largest_rule_is_symmetric_and_normalized() {
    let (x, w) = gauss_hermite_1d(30).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(w.iter().all(|&v| v > 0.0));
    let m10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
    assert!((m10 - 945.0).abs() < 1e-8);
}

#[test]
fn hermite_orthogonality_against_monomial_moments() {
    // E[He_j He_k] = δ_jk j!, evaluated through exact monomial coefficients
    for j in 0..=10 {
        let cj = hermite_coefficients(j);
        for k in 0..=10 {
            let ck = hermite_coefficients(k);
            let mut e = 0.0;
            for (a, ca) in cj.iter().enumerate() {
                for (b, cb) in ck.iter().enumerate() {
                    e += (*ca as f64) * (*cb as f64) * normal_moment((a + b) as u32);
                }
            }
            let want = if j == k { factorial(j) } else { 0.0 };
            assert!((e - want).abs() <= 1e-9 * want.max(1.0), "j={j} k={k}: {e}");
        }
    }
}

#[test]
fn recurrence_matches_monomial_expansion() {
    for n in 0..=12 {
        let c = hermite_coefficients(n);
        for u in [-2.5f64, -0.3, 0.0, 1.1, 3.7] {
            let want: f64 = c
                .iter()
                .enumerate()
                .map(|(i, ci)| *ci as f64 * u.powi(i as i32))
                .sum();
            let got = hermite_1d(n, u);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "n={n} u={u}"
            );
        }
    }
}

#[test]
fn tensor_gram_matrix_is_identity() {
    let design = tensor_design(3, 7).unwrap();
    let basis = BasisSet::total_degree(3, 3).unwrap();
    let psi = basis.design_matrix(design.points()).unwrap();
    let w = design.weights().unwrap();
    let p = basis.len();
    for a in 0..p {
        for b in 0..p {
            let g: f64 = (0..design.len())
                .map(|j| w[j] * psi[(j, a)] * psi[(j, b)])
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-9, "({a},{b}) = {g}");
        }
    }
}

#[test]
fn smolyak_level_one_exact_to_total_degree_three() {
    let design = smolyak_design(3, 1).unwrap();
    assert_eq!(design.len(), 7);
    for a in 0..=3u32 {
        for b in 0..=(3 - a) {
            for c in 0..=(3 - a - b) {
                let got = design
                    .integrate(|u| u[0].powi(a as i32) * u[1].powi(b as i32) * u[2].powi(c as i32))
                    .unwrap();
                let want = normal_moment(a) * normal_moment(b) * normal_moment(c);
                assert!((got - want).abs() < 1e-10, "({a},{b},{c}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn point_count_identities() {
    assert_eq!(BasisSet::total_degree(6, 2).unwrap().len(), 28);
    assert_eq!(tensor_design(6, 3).unwrap().len(), 729);
    assert_eq!(smolyak_design(6, 1).unwrap().len(), 13);
}

#[test]
fn quadrature_designs_integrate_constants_and_odd_monomials() {
    for design in [
        tensor_design(3, 4).unwrap(),
        smolyak_design(4, 2).unwrap(),
        smolyak_design(5, 1).unwrap(),
    ] {
        assert!((design.integrate(|_| 1.0).unwrap() - 1.0).abs() < 1e-12);
        for d in 0..design.dim() {
            for k in [1, 3, 5] {
                assert!(design.integrate(|u| u[d].powi(k)).unwrap().abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lhs_fills_every_stratum_once(n in 2usize..60, dim in 1usize..5, seed in any::<u64>()) {
        let design = lhs_design(n, dim, seed).unwrap();
        for d in 0..dim {
            let mut seen = vec![false; n];
            for j in 0..n {
                let stratum = ((normal::cdf(design.points()[(j, d)]) * n as f64).floor() as usize).min(n - 1);
                prop_assert!(!seen[stratum], "stratum {stratum} hit twice in column {d}");
                seen[stratum] = true;
            }
        }
    }

    #[test]
    fn lhs_is_deterministic(n in 1usize..30, dim in 1usize..4, seed in any::<u64>()) {
        prop_assert_eq!(lhs_design(n, dim, seed).unwrap(), lhs_design(n, dim, seed).unwrap());
    }
}
