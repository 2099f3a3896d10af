//! Marked non-homogeneous Poisson job streams.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::value_dist::ValueDistribution;

/// Arrival rate `lambda(t)` on `[0, T]`, in jobs per unit time.
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityFunction {
    Constant { rate: f64 },
    /// Rate `rates[b]` on `[b * bin_width, (b + 1) * bin_width)`; the last
    /// bin extends to the horizon.
    PiecewiseConstant { bin_width: f64, rates: Vec<f64> },
    Scaled { base: Box<IntensityFunction>, factor: f64 },
}

impl IntensityFunction {
    pub fn constant(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("constant rate must be positive, got {rate}")));
        }
        Ok(Self::Constant { rate })
    }

    pub fn piecewise(bin_width: f64, rates: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(invalid(format!("bin width must be positive, got {bin_width}")));
        }
        if rates.is_empty() {
            return Err(Error::EmptyInput("piecewise rates"));
        }
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(invalid("piecewise rates must be finite and nonnegative"));
        }
        Ok(Self::PiecewiseConstant { bin_width, rates })
    }

    /// Piecewise-constant rates that tile `[0, horizon]` exactly.
    pub fn piecewise_over(horizon: f64, bin_width: f64, rates: Vec<f64>) -> Result<Self> {
        let expected = bin_count(horizon, bin_width);
        if rates.len() != expected {
            return Err(invalid(format!(
                "{} rates do not tile [0, {horizon}] with width {bin_width} ({expected} bins)",
                rates.len()
            )));
        }
        Self::piecewise(bin_width, rates)
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid(format!("intensity factor must be positive, got {factor}")));
        }
        Ok(Self::Scaled { base: Box::new(self), factor })
    }

    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Self::Constant { rate } => *rate,
            Self::PiecewiseConstant { bin_width, rates } => rates[bin_index(t, *bin_width, rates.len())],
            Self::Scaled { base, factor } => factor * base.rate(t),
        }
    }

    /// Expected number of arrivals in `[a, b]`; requires `0 <= a <= b <= horizon`.
    pub fn integrate(&self, a: f64, b: f64, horizon: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= horizon) {
            return Err(Error::BadInterval { a, b, horizon });
        }
        Ok(self.integral(a, b))
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        match self {
            Self::Constant { rate } => rate * (b - a),
            Self::PiecewiseConstant { bin_width, rates } => {
                let last = rates.len() - 1;
                let first = bin_index(a, *bin_width, rates.len());
                let mut total = 0.0;
                for (i, rate) in rates.iter().enumerate().skip(first) {
                    let lo = i as f64 * bin_width;
                    let hi = if i == last { f64::INFINITY } else { (i + 1) as f64 * bin_width };
                    if lo >= b {
                        break;
                    }
                    let overlap = hi.min(b) - lo.max(a);
                    if overlap > 0.0 {
                        total += rate * overlap;
                    }
                }
                total
            }
            Self::Scaled { base, factor } => factor * base.integral(a, b),
        }
    }

    /// Supremum of the rate; the thinning envelope.
    pub fn max_rate(&self) -> f64 {
        match self {
            Self::Constant { rate } => *rate,
            Self::PiecewiseConstant { rates, .. } => rates.iter().copied().fold(0.0, f64::max),
            Self::Scaled { base, factor } => factor * base.max_rate(),
        }
    }

    /// `(1/T) * integral of the rate over [0, T]`.
    pub fn mean_rate(&self, horizon: f64) -> f64 {
        self.integral(0.0, horizon) / horizon
    }
}

/// Number of bins of width `bin_width` covering `[0, horizon]`, the last
/// possibly truncated. Ratios within 1e-9 of an integer count as exact.
pub fn bin_count(horizon: f64, bin_width: f64) -> usize {
    let ratio = horizon / bin_width;
    let rounded = ratio.round();
    let n = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) { rounded } else { ratio.ceil() };
    (n as usize).max(1)
}

/// Bin holding `t`; times at or past the last boundary map to the last bin.
pub(crate) fn bin_index(t: f64, bin_width: f64, bins: usize) -> usize {
    if t <= 0.0 {
        return 0;
    }
    ((t / bin_width).floor() as usize).min(bins - 1)
}

/// One arrival: time, value, and for scored streams a discriminator score
/// and true label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub value: f64,
    pub score: Option<f64>,
    pub label: Option<u8>,
}

impl Event {
    pub fn new(t: f64, value: f64) -> Self {
        Self { t, value, score: None, label: None }
    }

    pub fn scored(t: f64, value: f64, score: f64, label: u8) -> Self {
        Self { t, value, score: Some(score), label: Some(label) }
    }
}

/// A sample path of the marked arrival process over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    events: Vec<Event>,
    horizon: f64,
}

impl Realization {
    /// Validates strictly increasing times in `[0, horizon]` and nonnegative
    /// values; scores must lie in `[0, 1]` and labels in `{0, 1}`.
    pub fn new(events: Vec<Event>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let mut prev = f64::NEG_INFINITY;
        for e in &events {
            if !(0.0..=horizon).contains(&e.t) {
                return Err(Error::EventOutOfRange { t: e.t, horizon });
            }
            if e.t <= prev {
                return Err(Error::Schema(format!("event times not strictly increasing at t = {}", e.t)));
            }
            prev = e.t;
            if !(e.value >= 0.0 && e.value.is_finite()) {
                return Err(Error::NegativeInput { what: "event value", value: e.value });
            }
            if let Some(s) = e.score {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Schema(format!("score {s} outside [0, 1]")));
                }
            }
            if let Some(l) = e.label {
                if l > 1 {
                    return Err(Error::Schema(format!("label {l} is not binary")));
                }
            }
        }
        Ok(Self { events, horizon })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_scored(&self) -> bool {
        self.events.iter().all(|e| e.score.is_some() && e.label.is_some())
    }
}

/// Simulate one realization. Constant rates use exponential gaps directly;
/// everything else goes through Lewis-Shedler thinning under the exact
/// envelope `max_rate`.
pub fn simulate<R: Rng + ?Sized>(
    intensity: &IntensityFunction,
    dist: &ValueDistribution,
    horizon: f64,
    rng: &mut R,
) -> Result<Realization> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let envelope = intensity.max_rate();
    let mut events = Vec::new();
    if envelope > 0.0 {
        let homogeneous = matches!(intensity, IntensityFunction::Constant { .. })
            || matches!(intensity, IntensityFunction::Scaled { base, .. } if matches!(**base, IntensityFunction::Constant { .. }));
        let mut t = 0.0;
        loop {
            let u: f64 = rng.sample(Open01);
            t -= u.ln() / envelope;
            if t > horizon {
                break;
            }
            if !homogeneous {
                let accept: f64 = rng.random();
                if accept * envelope >= intensity.rate(t) {
                    continue;
                }
            }
            let value = dist.sample(rng);
            events.push(Event::new(t, value));
        }
    }
    Realization::new(events, horizon)
}
