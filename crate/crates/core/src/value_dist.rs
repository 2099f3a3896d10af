//! Job-value distributions.
//!
//! Two analytic families (exponential and Lomax) serve both as simulation
//! sources and as closed-form oracles; the empirical variant resamples a
//! fixed list of observed values.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::estimators::MeanShortageCache;

/// The quantities of a nonnegative value law that thresholding needs.
///
/// `shortage` is the mean shortage function `E[(X - y)+]`; below zero it
/// continues with slope -1 (every value exceeds a negative threshold).
pub trait ValueModel {
    fn shortage(&self, y: f64) -> f64;

    /// `P(X > y)`.
    fn survival(&self, y: f64) -> f64;

    /// `E[X; X > y]`, which equals `shortage(y) + y * survival(y)`.
    fn partial_mean(&self, y: f64) -> f64 {
        if y == f64::INFINITY {
            return 0.0;
        }
        self.shortage(y) + y * self.survival(y)
    }
}

impl<T: ValueModel + ?Sized> ValueModel for &T {
    fn shortage(&self, y: f64) -> f64 {
        (**self).shortage(y)
    }
    fn survival(&self, y: f64) -> f64 {
        (**self).survival(y)
    }
    fn partial_mean(&self, y: f64) -> f64 {
        (**self).partial_mean(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Exponential { mean: f64 },
    Lomax { shape: f64, scale: f64 },
    Empirical(MeanShortageCache),
}

/// A validated job-value distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDistribution {
    kind: Kind,
}

impl ValueDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(invalid(format!("exponential mean must be positive, got {mean}")));
        }
        Ok(Self { kind: Kind::Exponential { mean } })
    }

    /// Lomax (Pareto type II) with shape `alpha > 1` and scale `xi > 0`.
    pub fn lomax(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 1.0 && shape.is_finite()) {
            return Err(invalid(format!(
                "lomax shape must exceed 1 for a finite mean, got {shape}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("lomax scale must be positive, got {scale}")));
        }
        Ok(Self { kind: Kind::Lomax { shape, scale } })
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        Ok(Self { kind: Kind::Empirical(MeanShortageCache::build(samples)?) })
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, Kind::Empirical(_))
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => *mean,
            Kind::Lomax { shape, scale } => scale / (shape - 1.0),
            Kind::Empirical(cache) => cache.sample_mean(),
        }
    }

    /// Same family with every value multiplied by `factor`, so the mean
    /// scales by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid(format!("scale factor must be positive, got {factor}")));
        }
        match &self.kind {
            Kind::Exponential { mean } => Self::exponential(mean * factor),
            Kind::Lomax { shape, scale } => Self::lomax(*shape, scale * factor),
            Kind::Empirical(cache) => {
                Self::empirical(cache.samples().iter().map(|x| x * factor).collect())
            }
        }
    }

    /// Draw one value by inverse-CDF (analytic) or uniform resampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => {
                let u: f64 = rng.random();
                -mean * (1.0 - u).ln()
            }
            Kind::Lomax { shape, scale } => {
                let u: f64 = rng.random();
                scale * ((1.0 - u).powf(-1.0 / shape) - 1.0)
            }
            Kind::Empirical(cache) => {
                let xs = cache.samples();
                xs[rng.random_range(0..xs.len())]
            }
        }
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        if z < 0.0 || z.is_nan() {
            return Err(Error::NegativeInput { what: "cdf argument", value: z });
        }
        Ok(1.0 - self.survival(z))
    }

    /// Closed-form mean shortage function; only the analytic families have one.
    pub fn phi_exact(&self, y: f64) -> Result<f64> {
        if y < 0.0 || y.is_nan() {
            return Err(Error::NegativeInput { what: "mean shortage argument", value: y });
        }
        match &self.kind {
            Kind::Empirical(_) => Err(invalid(
                "empirical distributions have no closed-form mean shortage; use MeanShortageCache",
            )),
            _ => Ok(self.shortage(y)),
        }
    }

    /// Point beyond which `1 - F` is below `tail`.
    pub fn tail_quantile(&self, tail: f64) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => -mean * tail.ln(),
            Kind::Lomax { shape, scale } => scale * (tail.powf(-1.0 / shape) - 1.0),
            Kind::Empirical(cache) => cache.samples().last().copied().unwrap_or(0.0),
        }
    }
}

impl ValueModel for ValueDistribution {
    fn shortage(&self, y: f64) -> f64 {
        if y < 0.0 {
            return self.shortage(0.0) - y;
        }
        match &self.kind {
            Kind::Exponential { mean } => mean * (-y / mean).exp(),
            Kind::Lomax { shape, scale } => {
                // xi^a (xi + y)^(1 - a) / (a - 1), written to avoid overflow of xi^a.
                scale / (shape - 1.0) * (1.0 + y / scale).powf(1.0 - shape)
            }
            Kind::Empirical(cache) => cache.shortage(y),
        }
    }

    fn survival(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 1.0;
        }
        match &self.kind {
            Kind::Exponential { mean } => (-y / mean).exp(),
            Kind::Lomax { shape, scale } => (1.0 + y / scale).powf(-shape),
            Kind::Empirical(cache) => cache.survival(y),
        }
    }
}
