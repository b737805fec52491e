//! Training point sets in standard normal space: Latin hypercube samples,
//! full tensor Gauss–Hermite grids and Smolyak sparse grids.

use crate::basis::hermite_orthonormal;
use crate::error::{Result, UqError};
use crate::normal;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Default cap on the number of tensor-grid points.
pub const DEFAULT_POINT_CAP: usize = 1_000_000;

/// Number of 1D Gauss–Hermite points used by each Smolyak level.
const SMOLYAK_SIZES: [usize; 3] = [1, 3, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Lhs,
    TensorQuadrature,
    Smolyak,
}

impl DesignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignKind::Lhs => "lhs",
            DesignKind::TensorQuadrature => "tensor",
            DesignKind::Smolyak => "smolyak",
        }
    }
}

/// N × D standard-normal points, with weights for quadrature designs.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: DMatrix<f64>,
    weights: Option<Vec<f64>>,
    kind: DesignKind,
}

impl Design {
    pub fn new(points: DMatrix<f64>, weights: Option<Vec<f64>>, kind: DesignKind) -> Result<Self> {
        if let Some(w) = &weights {
            if w.len() != points.nrows() {
                return Err(UqError::DimensionMismatch {
                    expected: points.nrows(),
                    got: w.len(),
                });
            }
        }
        Ok(Self {
            points,
            weights,
            kind,
        })
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.points.row(j).iter().copied().collect()
    }

    /// Quadrature estimate Σ wⱼ f(uⱼ); `None` for unweighted designs.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> Option<f64> {
        let w = self.weights.as_ref()?;
        Some((0..self.len()).map(|j| w[j] * f(&self.row(j))).sum())
    }
}

/// Stratified uniforms on [0,1)^D: column d holds (πd(j) + rⱼd)/N.
pub fn lhs_unit(n: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, dim);
    let mut perm: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        perm.shuffle(&mut rng);
        for j in 0..n {
            let jitter = loop {
                let r: f64 = rng.random();
                if r > 0.0 {
                    break r;
                }
            };
            out[(j, d)] = (perm[j] as f64 + jitter) / n as f64;
        }
    }
    out
}

/// Latin hypercube design mapped to standard normal coordinates.
pub fn lhs_design(n: usize, dim: usize, seed: u64) -> Result<Design> {
    if n == 0 || dim == 0 {
        return Err(UqError::InvalidParameter(
            "LHS needs at least one point and one dimension".into(),
        ));
    }
    let unit = lhs_unit(n, dim, seed);
    Design::new(unit.map(normal::inv_cdf), None, DesignKind::Lhs)
}

/// Probabilists' Gauss–Hermite rule: nodes and weights for E[f(U)], U ~ N(0,1).
///
/// Nodes come from the eigenvalues of the symmetric Jacobi matrix of the
/// recurrence, polished by Newton steps on the orthonormal polynomial; weights
/// come from the Christoffel function 1 / Σₖ ψₖ(x)².
pub fn gauss_hermite_1d(n_points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=30).contains(&n_points) {
        return Err(UqError::QuadratureRange(n_points));
    }
    let n = n_points;
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    nodes.sort_by(f64::total_cmp);

    for x in nodes.iter_mut() {
        for _ in 0..3 {
            // ψ_n'(x) = √n ψ_{n-1}(x)
            let p = hermite_orthonormal(n, *x);
            let dp = (n as f64).sqrt() * hermite_orthonormal(n - 1, *x);
            if dp == 0.0 {
                break;
            }
            *x -= p / dp;
        }
    }
    // Enforce exact symmetry about the origin.
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            1.0 / (0..n)
                .map(|k| hermite_orthonormal(k, x).powi(2))
                .sum::<f64>()
        })
        .collect();
    for i in 0..n / 2 {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((nodes, weights))
}

/// Full tensor product of `points_per_axis`-point Gauss–Hermite rules; the
/// last axis varies fastest.
pub fn tensor_design(dim: usize, points_per_axis: usize) -> Result<Design> {
    tensor_design_capped(dim, points_per_axis, DEFAULT_POINT_CAP)
}

pub fn tensor_design_capped(dim: usize, points_per_axis: usize, cap: usize) -> Result<Design> {
    if dim == 0 || points_per_axis == 0 {
        return Err(UqError::InvalidParameter(
            "tensor design needs dim >= 1 and points_per_axis >= 1".into(),
        ));
    }
    let count = (points_per_axis as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(UqError::CapExceeded { count, cap });
    }
    let (nodes, weights) = gauss_hermite_1d(points_per_axis)?;
    let rules = vec![(nodes, weights); dim];
    let (points, w) = tensor_grid(&rules);
    Design::new(points, Some(w), DesignKind::TensorQuadrature)
}

fn tensor_grid(rules: &[(Vec<f64>, Vec<f64>)]) -> (DMatrix<f64>, Vec<f64>) {
    let dim = rules.len();
    let count: usize = rules.iter().map(|r| r.0.len()).product();
    let mut points = DMatrix::zeros(count, dim);
    let mut weights = vec![0.0; count];
    let mut counter = vec![0usize; dim];
    for j in 0..count {
        let mut w = 1.0;
        for d in 0..dim {
            points[(j, d)] = rules[d].0[counter[d]];
            w *= rules[d].1[counter[d]];
        }
        weights[j] = w;
        for d in (0..dim).rev() {
            counter[d] += 1;
            if counter[d] < rules[d].0.len() {
                break;
            }
            counter[d] = 0;
        }
    }
    (points, weights)
}

/// Smolyak combination of Gauss–Hermite rules with 1, 3, 7 points at levels
/// 0, 1, 2. Coincident points are merged and their weights summed.
pub fn smolyak_design(dim: usize, level: usize) -> Result<Design> {
    if level >= SMOLYAK_SIZES.len() {
        return Err(UqError::UnsupportedLevel(level));
    }
    if dim == 0 {
        return Err(UqError::InvalidParameter(
            "Smolyak design needs dim >= 1".into(),
        ));
    }
    let rules: Vec<(Vec<f64>, Vec<f64>)> = SMOLYAK_SIZES[..=level]
        .iter()
        .map(|&m| gauss_hermite_1d(m))
        .collect::<Result<_>>()?;

    let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut lookup: HashMap<Vec<i64>, usize> = HashMap::new();

    let mut levels = vec![0usize; dim];
    loop {
        let total: usize = levels.iter().sum();
        // Only multi-levels with level - dim + 1 <= |l| <= level contribute.
        if total <= level && total + dim > level {
            let gap = level - total;
            let coeff = if gap.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(dim - 1, gap);
            let sub: Vec<_> = levels.iter().map(|&l| rules[l].clone()).collect();
            let (pts, w) = tensor_grid(&sub);
            for j in 0..pts.nrows() {
                let coords: Vec<f64> = pts.row(j).iter().copied().collect();
                let key: Vec<i64> = coords.iter().map(|c| (c / 1e-12).round() as i64).collect();
                match lookup.get(&key) {
                    Some(&idx) => merged[idx].1 += coeff * w[j],
                    None => {
                        lookup.insert(key, merged.len());
                        merged.push((coords, coeff * w[j]));
                    }
                }
            }
        }
        if !next_level(&mut levels, level) {
            break;
        }
    }

    let n = merged.len();
    let mut points = DMatrix::zeros(n, dim);
    let mut weights = Vec::with_capacity(n);
    for (j, (coords, w)) in merged.into_iter().enumerate() {
        for d in 0..dim {
            points[(j, d)] = coords[d];
        }
        weights.push(w);
    }
    Design::new(points, Some(weights), DesignKind::Smolyak)
}

/// Odometer over multi-levels with every entry <= max_level; false when exhausted.
fn next_level(levels: &mut [usize], max_level: usize) -> bool {
    for d in (0..levels.len()).rev() {
        if levels[d] < max_level {
            levels[d] += 1;
            return true;
        }
        levels[d] = 0;
    }
    false
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
