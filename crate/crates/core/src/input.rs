//! Marginal input distributions and the isoprobabilistic map to standard
//! normal space.
//!
//! Every marginal is specified by its mean and standard deviation; the
//! family's native parameters are derived by moment matching. Marginals are
//! independent, so the joint transform is applied component-wise.

use crate::error::{Result, UqError};
use crate::normal;
use rand::Rng;
use rand_distr::{Distribution, Gumbel, LogNormal, Normal, Uniform};
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Lognormal,
    Uniform,
    /// Extreme value type I for maxima.
    GumbelMax,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Lognormal => "lognormal",
            Family::Uniform => "uniform",
            Family::GumbelMax => "gumbel_max",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Family::Normal),
            "lognormal" => Ok(Family::Lognormal),
            "uniform" => Ok(Family::Uniform),
            "gumbel_max" => Ok(Family::GumbelMax),
            other => Err(UqError::InvalidParameter(format!(
                "unknown distribution family `{other}`"
            ))),
        }
    }
}

/// Native parameterization of a marginal, matched to its (mean, std).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NativeParams {
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// `ln X ~ N(lambda, zeta²)`.
    Lognormal {
        lambda: f64,
        zeta: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
    GumbelMax {
        location: f64,
        scale: f64,
    },
}

/// A marginal distribution given by family, mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    name: String,
    family: Family,
    mean: f64,
    std: f64,
    native: NativeParams,
}

impl DistributionSpec {
    pub fn new(name: impl Into<String>, family: Family, mean: f64, std: f64) -> Result<Self> {
        let name = name.into();
        if !mean.is_finite() || !std.is_finite() || std <= 0.0 {
            return Err(UqError::InvalidParameter(format!(
                "`{name}`: std must be finite and > 0 (got {std})"
            )));
        }
        if family == Family::Lognormal && mean <= 0.0 {
            return Err(UqError::InvalidParameter(format!(
                "`{name}`: lognormal mean must be > 0 (got {mean})"
            )));
        }
        let native = native_params(family, mean, std);
        Ok(Self {
            name,
            family,
            mean,
            std,
            native,
        })
    }

    pub fn normal(name: impl Into<String>, mean: f64, std: f64) -> Result<Self> {
        Self::new(name, Family::Normal, mean, std)
    }

    pub fn lognormal(name: impl Into<String>, mean: f64, std: f64) -> Result<Self> {
        Self::new(name, Family::Lognormal, mean, std)
    }

    pub fn uniform(name: impl Into<String>, mean: f64, std: f64) -> Result<Self> {
        Self::new(name, Family::Uniform, mean, std)
    }

    pub fn gumbel_max(name: impl Into<String>, mean: f64, std: f64) -> Result<Self> {
        Self::new(name, Family::GumbelMax, mean, std)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn native_params(&self) -> NativeParams {
        self.native
    }

    /// Closed support interval `(lower, upper)`; infinite ends for unbounded families.
    pub fn support(&self) -> (f64, f64) {
        match self.native {
            NativeParams::Lognormal { .. } => (0.0, f64::INFINITY),
            NativeParams::Uniform { lower, upper } => (lower, upper),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.native {
            NativeParams::Normal { mu, sigma } => normal::cdf((x - mu) / sigma),
            NativeParams::Lognormal { lambda, zeta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal::cdf((x.ln() - lambda) / zeta)
                }
            }
            NativeParams::Uniform { lower, upper } => {
                ((x - lower) / (upper - lower)).clamp(0.0, 1.0)
            }
            NativeParams::GumbelMax { location, scale } => (-(-(x - location) / scale).exp()).exp(),
        }
    }

    /// Survival function 1 − F(x), evaluated without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self.native {
            NativeParams::Normal { mu, sigma } => normal::sf((x - mu) / sigma),
            NativeParams::Lognormal { lambda, zeta } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal::sf((x.ln() - lambda) / zeta)
                }
            }
            NativeParams::Uniform { lower, upper } => {
                ((upper - x) / (upper - lower)).clamp(0.0, 1.0)
            }
            NativeParams::GumbelMax { location, scale } => {
                -(-(-(x - location) / scale).exp()).exp_m1()
            }
        }
    }

    pub fn inv_cdf(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(UqError::ProbabilityDomain(p));
        }
        Ok(match self.native {
            NativeParams::Normal { mu, sigma } => mu + sigma * normal::inv_cdf(p),
            NativeParams::Lognormal { lambda, zeta } => (lambda + zeta * normal::inv_cdf(p)).exp(),
            NativeParams::Uniform { lower, upper } => lower + p * (upper - lower),
            NativeParams::GumbelMax { location, scale } => location - scale * (-p.ln()).ln(),
        })
    }

    /// Physical value with standard-normal image `u`: F⁻¹(Φ(u)).
    ///
    /// Upper-tail arguments go through survival probabilities so the map stays
    /// accurate for |u| up to the quantile clamp.
    pub fn from_standard_normal(&self, u: f64) -> f64 {
        match self.native {
            NativeParams::Normal { mu, sigma } => mu + sigma * u,
            NativeParams::Lognormal { lambda, zeta } => (lambda + zeta * u).exp(),
            NativeParams::Uniform { lower, upper } => {
                if u <= 0.0 {
                    lower + (upper - lower) * normal::cdf(u)
                } else {
                    upper - (upper - lower) * normal::sf(u)
                }
            }
            NativeParams::GumbelMax { location, scale } => {
                if u <= 0.0 {
                    location - scale * (-normal::cdf(u).ln()).ln()
                } else {
                    // -ln(p) with p = 1 - q
                    location - scale * (-(-normal::sf(u)).ln_1p()).ln()
                }
            }
        }
    }

    /// Standard-normal image Φ⁻¹(F(x)) of a physical value.
    pub fn to_standard_normal(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let outside =
            x.is_nan() || x < lo || x > hi || (self.family == Family::Lognormal && x <= 0.0);
        if outside {
            return Err(UqError::OutsideSupport {
                name: self.name.clone(),
                value: x,
            });
        }
        let u = match self.native {
            NativeParams::Normal { mu, sigma } => (x - mu) / sigma,
            NativeParams::Lognormal { lambda, zeta } => (x.ln() - lambda) / zeta,
            _ => {
                let p = self.cdf(x);
                if p <= 0.5 {
                    normal::inv_cdf(p)
                } else {
                    normal::inv_sf(self.sf(x))
                }
            }
        };
        Ok(u.clamp(-normal::TAIL_CLAMP, normal::TAIL_CLAMP))
    }

    /// Draws from the native parameterization (independent of the transform path).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.native {
            NativeParams::Normal { mu, sigma } => {
                Normal::new(mu, sigma).expect("valid normal").sample(rng)
            }
            NativeParams::Lognormal { lambda, zeta } => LogNormal::new(lambda, zeta)
                .expect("valid lognormal")
                .sample(rng),
            NativeParams::Uniform { lower, upper } => Uniform::new(lower, upper)
                .expect("valid uniform")
                .sample(rng),
            NativeParams::GumbelMax { location, scale } => Gumbel::new(location, scale)
                .expect("valid gumbel")
                .sample(rng),
        }
    }
}

/// Moment-matched native parameters for a family with the given mean and std.
pub fn native_params(family: Family, mean: f64, std: f64) -> NativeParams {
    match family {
        Family::Normal => NativeParams::Normal {
            mu: mean,
            sigma: std,
        },
        Family::Lognormal => {
            let zeta2 = (std / mean).powi(2).ln_1p();
            NativeParams::Lognormal {
                lambda: mean.ln() - 0.5 * zeta2,
                zeta: zeta2.sqrt(),
            }
        }
        Family::Uniform => {
            let half = 3f64.sqrt() * std;
            NativeParams::Uniform {
                lower: mean - half,
                upper: mean + half,
            }
        }
        Family::GumbelMax => {
            let scale = std * 6f64.sqrt() / PI;
            NativeParams::GumbelMax {
                location: mean - EULER_GAMMA * scale,
                scale,
            }
        }
    }
}

/// Ordered collection of independent marginals; the order fixes the
/// coordinate layout used by every downstream stage.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpace {
    marginals: Vec<DistributionSpec>,
}

impl InputSpace {
    pub fn new(marginals: Vec<DistributionSpec>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(UqError::InvalidParameter(
                "input space needs at least one marginal".into(),
            ));
        }
        Ok(Self { marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[DistributionSpec] {
        &self.marginals
    }

    pub fn names(&self) -> Vec<String> {
        self.marginals
            .iter()
            .map(|m| m.name().to_string())
            .collect()
    }

    pub fn u_to_x(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u.len())?;
        Ok(self
            .marginals
            .iter()
            .zip(u)
            .map(|(m, &ui)| m.from_standard_normal(ui))
            .collect())
    }

    pub fn x_to_u(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        self.marginals
            .iter()
            .zip(x)
            .map(|(m, &xi)| m.to_standard_normal(xi))
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.marginals.iter().map(|m| m.sample(rng)).collect()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(UqError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}
