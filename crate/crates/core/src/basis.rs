//! Total-degree multi-index sets and orthonormal multivariate Hermite
//! polynomials (probabilists' convention).

use crate::error::{Result, UqError};
use nalgebra::DMatrix;

/// Highest univariate order supported; factorial normalization loses
/// precision past this point.
pub const MAX_ORDER: usize = 30;

/// Default cap on the number of basis terms.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Probabilists' Hermite polynomial Heⱼ(u), unnormalized.
pub fn hermite_1d(order: usize, u: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut prev, mut cur) = (1.0, u);
            for j in 2..=order {
                let next = u * cur - (j - 1) as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Orthonormal values Heⱼ(u)/√(j!) for j = 0..=max_order, written into `out`.
fn orthonormal_hermite_into(max_order: usize, u: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if max_order == 0 {
        return;
    }
    out[1] = u;
    // ψ_j = (u ψ_{j-1} − √(j−1) ψ_{j−2}) / √j
    for j in 2..=max_order {
        out[j] = (u * out[j - 1] - ((j - 1) as f64).sqrt() * out[j - 2]) / (j as f64).sqrt();
    }
}

/// Orthonormal Hermite polynomial Heⱼ(u)/√(j!).
pub fn hermite_orthonormal(order: usize, u: f64) -> f64 {
    let mut buf = vec![0.0; order + 1];
    orthonormal_hermite_into(order, u, &mut buf);
    buf[order]
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(powers: Vec<u32>) -> Self {
        Self(powers)
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Positions with a nonzero power.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, _)| i)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&p| p == 0)
    }
}

/// C(n + k, k) without overflow for the sizes we care about.
pub fn total_degree_count(dim: usize, max_order: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=max_order as u128 {
        c = c.saturating_mul(dim as u128 + i) / i;
    }
    c
}

/// Ordered total-degree basis: graded by degree, then lexicographic with
/// larger leading powers first. The first index is always all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    dim: usize,
    max_order: usize,
    indices: Vec<MultiIndex>,
}

impl BasisSet {
    pub fn total_degree(dim: usize, max_order: usize) -> Result<Self> {
        Self::total_degree_capped(dim, max_order, DEFAULT_TERM_CAP)
    }

    pub fn total_degree_capped(dim: usize, max_order: usize, cap: usize) -> Result<Self> {
        if dim == 0 {
            return Err(UqError::InvalidParameter(
                "basis dimension must be >= 1".into(),
            ));
        }
        if max_order > MAX_ORDER {
            return Err(UqError::InvalidParameter(format!(
                "polynomial order {max_order} exceeds the maximum of {MAX_ORDER}"
            )));
        }
        let count = total_degree_count(dim, max_order);
        if count > cap as u128 {
            return Err(UqError::CapExceeded { count, cap });
        }
        let mut indices = Vec::with_capacity(count as usize);
        let mut scratch = vec![0u32; dim];
        for degree in 0..=max_order as u32 {
            push_degree(&mut indices, &mut scratch, 0, degree);
        }
        debug_assert_eq!(indices.len() as u128, count);
        Ok(Self {
            dim,
            max_order,
            indices,
        })
    }

    /// Builds a basis from an explicit index list (used when reading models back).
    pub fn from_indices(dim: usize, max_order: usize, indices: Vec<MultiIndex>) -> Result<Self> {
        if !indices.first().is_some_and(MultiIndex::is_zero) {
            return Err(UqError::InvalidParameter(
                "first multi-index must be all zeros".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for m in &indices {
            if m.dim() != dim {
                return Err(UqError::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if m.total_degree() as usize > max_order {
                return Err(UqError::InvalidParameter(format!(
                    "multi-index {:?} exceeds order {max_order}",
                    m.powers()
                )));
            }
            if !seen.insert(m.clone()) {
                return Err(UqError::InvalidParameter(format!(
                    "duplicate multi-index {:?}",
                    m.powers()
                )));
            }
        }
        Ok(Self {
            dim,
            max_order,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, powers: &[u32]) -> Option<usize> {
        self.indices.iter().position(|m| m.powers() == powers)
    }

    /// Orthonormal basis values ψ_p(u) = Πd Heₚd(ud)/√(pd!).
    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(u, &mut out)?;
        Ok(out)
    }

    fn eval_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(UqError::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let stride = self.max_order + 1;
        let mut table = vec![0.0; self.dim * stride];
        for (d, &ud) in u.iter().enumerate() {
            orthonormal_hermite_into(self.max_order, ud, &mut table[d * stride..(d + 1) * stride]);
        }
        for (slot, m) in out.iter_mut().zip(&self.indices) {
            *slot = m
                .powers()
                .iter()
                .enumerate()
                .map(|(d, &p)| table[d * stride + p as usize])
                .product();
        }
        Ok(())
    }

    /// Design matrix Ψ with row j = ψ(point j). `points` is N × D.
    pub fn design_matrix(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if points.ncols() != self.dim {
            return Err(UqError::DimensionMismatch {
                expected: self.dim,
                got: points.ncols(),
            });
        }
        let n = points.nrows();
        let mut psi = DMatrix::zeros(n, self.len());
        let mut u = vec![0.0; self.dim];
        let mut row = vec![0.0; self.len()];
        for j in 0..n {
            for (d, ud) in u.iter_mut().enumerate() {
                *ud = points[(j, d)];
            }
            self.eval_into(&u, &mut row)?;
            for (k, v) in row.iter().enumerate() {
                psi[(j, k)] = *v;
            }
        }
        Ok(psi)
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, scratch: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for p in (0..=remaining).rev() {
        scratch[pos] = p;
        push_degree(out, scratch, pos + 1, remaining - p);
    }
    scratch[pos] = 0;
}

/// Free function form of [`BasisSet::total_degree`].
pub fn enumerate_basis(dim: usize, max_order: usize) -> Result<BasisSet> {
    BasisSet::total_degree(dim, max_order)
}
