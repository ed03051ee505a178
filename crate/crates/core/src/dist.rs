//! Buyer type distributions on `[0, 1]`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Density and cdf of a type distribution supported on `[0, 1]`.
pub trait TypeDistribution: Send + Sync {
    fn name(&self) -> String;
    fn density(&self, v: f64) -> f64;
    fn cdf(&self, v: f64) -> f64;

    /// Lets solvers use closed forms that only hold for the uniform law.
    fn is_uniform(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Uniform;

impl TypeDistribution for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn density(&self, _v: f64) -> f64 {
        1.0
    }

    fn cdf(&self, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }

    fn is_uniform(&self) -> bool {
        true
    }
}

/// Density `1 + slope (v - 1/2)`, with `|slope| <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    slope: f64,
}

impl Linear {
    pub fn new(slope: f64) -> Result<Self> {
        if !(slope.abs() <= 2.0) {
            return Err(Error::InvalidParameter {
                name: "slope",
                value: slope,
                reason: "density turns negative unless |slope| <= 2",
            });
        }
        Ok(Linear { slope })
    }
}

impl TypeDistribution for Linear {
    fn name(&self) -> String {
        format!("linear(slope={})", self.slope)
    }

    fn density(&self, v: f64) -> f64 {
        1.0 + self.slope * (v - 0.5)
    }

    fn cdf(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        v + 0.5 * self.slope * (v * v - v)
    }
}

/// Exponential density `rate e^{-rate v}` renormalized to `[0, 1]`.
/// Negative rates tilt mass toward 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExponential {
    rate: f64,
}

impl TruncatedExponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate == 0.0 || rate.abs() > 50.0 {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: rate,
                reason: "must be nonzero with |rate| <= 50",
            });
        }
        Ok(TruncatedExponential { rate })
    }

    fn mass(&self) -> f64 {
        -(-self.rate).exp_m1()
    }
}

impl TypeDistribution for TruncatedExponential {
    fn name(&self) -> String {
        format!("truncated_exponential(rate={})", self.rate)
    }

    fn density(&self, v: f64) -> f64 {
        self.rate * (-self.rate * v).exp() / self.mass()
    }

    fn cdf(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        -(-self.rate * v).exp_m1() / self.mass()
    }
}

/// Normal distribution conditioned on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mean: f64,
    sd: f64,
    normal: Normal,
    cdf_lo: f64,
    mass: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        let normal = Normal::new(mean, sd).map_err(|_| Error::InvalidParameter {
            name: "sd",
            value: sd,
            reason: "must be positive and finite, with a finite mean",
        })?;
        let cdf_lo = normal.cdf(0.0);
        let mass = normal.cdf(1.0) - cdf_lo;
        if !(mass > 1e-12) {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "leaves no mass on [0, 1]",
            });
        }
        Ok(TruncatedNormal {
            mean,
            sd,
            normal,
            cdf_lo,
            mass,
        })
    }
}

impl TypeDistribution for TruncatedNormal {
    fn name(&self) -> String {
        format!("truncated_normal(mean={}, sd={})", self.mean, self.sd)
    }

    fn density(&self, v: f64) -> f64 {
        self.normal.pdf(v) / self.mass
    }

    fn cdf(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        if v == 1.0 {
            return 1.0;
        }
        ((self.normal.cdf(v) - self.cdf_lo) / self.mass).clamp(0.0, 1.0)
    }
}

/// Weighted mixture of truncated normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    parts: Vec<(f64, TruncatedNormal)>,
}

impl Mixture {
    /// Components are `(weight, mean, sd)`; weights are normalized.
    pub fn new(components: &[(f64, f64, f64)]) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.is_empty() || components.iter().any(|c| !(c.0 >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                value: total,
                reason: "weights must be nonnegative with a positive sum",
            });
        }
        let parts = components
            .iter()
            .map(|&(w, m, s)| Ok((w / total, TruncatedNormal::new(m, s)?)))
            .collect::<Result<_>>()?;
        Ok(Mixture { parts })
    }

    /// Two tight peaks near the extremes.
    pub fn bimodal() -> Self {
        Mixture::new(&[(0.5, 0.05, 0.03), (0.5, 0.95, 0.03)]).expect("valid components")
    }
}

impl TypeDistribution for Mixture {
    fn name(&self) -> String {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|(w, n)| format!("{w}*N({}, {})", n.mean, n.sd))
            .collect();
        format!("mixture({})", parts.join(" + "))
    }

    fn density(&self, v: f64) -> f64 {
        self.parts.iter().map(|(w, n)| w * n.density(v)).sum()
    }

    fn cdf(&self, v: f64) -> f64 {
        if v >= 1.0 {
            return 1.0;
        }
        self.parts.iter().map(|(w, n)| w * n.cdf(v)).sum::<f64>().clamp(0.0, 1.0)
    }
}

/// Serializable description of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform,
    Linear { slope: f64 },
    TruncatedExponential { rate: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
    Mixture { components: Vec<[f64; 3]> },
    Bimodal,
}

impl DistributionSpec {
    /// Build the distribution and run [`validate`] on it.
    pub fn build(&self) -> Result<Box<dyn TypeDistribution>> {
        let dist: Box<dyn TypeDistribution> = match self {
            DistributionSpec::Uniform => Box::new(Uniform),
            DistributionSpec::Linear { slope } => Box::new(Linear::new(*slope)?),
            DistributionSpec::TruncatedExponential { rate } => {
                Box::new(TruncatedExponential::new(*rate)?)
            }
            DistributionSpec::TruncatedNormal { mean, sd } => Box::new(TruncatedNormal::new(*mean, *sd)?),
            DistributionSpec::Mixture { components } => {
                let c: Vec<_> = components.iter().map(|c| (c[0], c[1], c[2])).collect();
                Box::new(Mixture::new(&c)?)
            }
            DistributionSpec::Bimodal => Box::new(Mixture::bimodal()),
        };
        validate(dist.as_ref(), 1001)?;
        Ok(dist)
    }
}

/// Check that `dist` is a proper density/cdf pair on a grid of `grid_n`
/// points: endpoints 0 and 1, monotone cdf, nonnegative density, and a
/// central-difference derivative of the cdf within 1e-6 of the density.
pub fn validate(dist: &dyn TypeDistribution, grid_n: usize) -> Result<()> {
    let fail = |reason: String| Error::InvalidDistribution {
        name: dist.name(),
        reason,
    };
    if dist.cdf(0.0).abs() > 1e-12 || (dist.cdf(1.0) - 1.0).abs() > 1e-12 {
        return Err(fail(format!(
            "cdf(0) = {}, cdf(1) = {}",
            dist.cdf(0.0),
            dist.cdf(1.0)
        )));
    }
    let n = grid_n.max(2);
    let h = 1e-6;
    let mut prev = 0.0;
    for k in 0..n {
        let v = k as f64 / (n - 1) as f64;
        let (p, f) = (dist.density(v), dist.cdf(v));
        if !(p >= 0.0) || !p.is_finite() {
            return Err(fail(format!("density({v}) = {p}")));
        }
        if f < prev - 1e-15 {
            return Err(fail(format!("cdf decreases at {v}")));
        }
        prev = f;
        if v - h >= 0.0 && v + h <= 1.0 {
            let slope = (dist.cdf(v + h) - dist.cdf(v - h)) / (2.0 * h);
            let scale = 1.0 + p;
            if (slope - p).abs() > 1e-6 * scale {
                return Err(fail(format!("cdf' = {slope} but density = {p} at {v}")));
            }
        }
    }
    Ok(())
}
