use std::io::Write;
use std::sync::Arc;

use crate::arrival::IntensityFunction;
use crate::error::{invalid, Error, Result};
use crate::ode::{solve_ivp, DenseSolution, SolverConfig};
use crate::value_dist::ValueModel;

/// One acceptance threshold as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// ODE solution stored in reversed time `s = T - t`.
    Dense(Arc<DenseSolution>),
    Constant(f64),
    /// Step function: `values[i]` holds on `[times[i], times[i + 1])`.
    Grid { times: Arc<[f64]>, values: Vec<f64> },
    Scaled { base: Box<Curve>, factor: f64 },
}

impl Curve {
    fn at(&self, t: f64, horizon: f64) -> f64 {
        match self {
            Curve::Dense(sol) => sol.eval_component(horizon - t, 0).max(0.0),
            Curve::Constant(c) => *c,
            Curve::Grid { times, values } => {
                let i = times.partition_point(|&g| g <= t).max(1) - 1;
                values[i]
            }
            Curve::Scaled { base, factor } => factor * base.at(t, horizon),
        }
    }
}

/// Thresholds `y_1(t) >= ... >= y_n(t)` on `[0, T]`. While `k` workers
/// remain, a job is accepted iff its value strictly exceeds `y_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalCurveSet {
    horizon: f64,
    curves: Vec<Curve>,
    provenance: String,
}

impl CriticalCurveSet {
    pub fn from_curves(horizon: f64, curves: Vec<Curve>, provenance: impl Into<String>) -> Result<Self> {
        if curves.is_empty() {
            return Err(invalid("a curve set needs at least one worker"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { horizon, curves, provenance: provenance.into() })
    }

    /// The same threshold for every worker at all times; `f64::INFINITY`
    /// gives the never-accept policy.
    pub fn constant(n: usize, horizon: f64, level: f64) -> Result<Self> {
        Self::from_curves(horizon, vec![Curve::Constant(level); n], format!("constant {level}"))
    }

    pub fn workers(&self) -> usize {
        self.curves.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    /// `y_k(t)` for `k` in `1..=n`.
    pub fn threshold(&self, k: usize, t: f64) -> f64 {
        self.curves[k - 1].at(t, self.horizon)
    }

    /// `sum_k y_k(t)`; at `t = 0` this is the optimal expected reward when
    /// the curves are the optimal ones.
    pub fn total(&self, t: f64) -> f64 {
        (1..=self.workers()).map(|k| self.threshold(k, t)).sum()
    }

    /// The curves for the first `n` workers. Curve `k` does not depend on
    /// how many workers follow it, so this is the solution for `n` workers.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.workers() {
            return Err(invalid(format!("cannot take {n} of {} curves", self.workers())));
        }
        Ok(Self { horizon: self.horizon, curves: self.curves[..n].to_vec(), provenance: self.provenance.clone() })
    }

    /// Every threshold multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let curves = self
            .curves
            .iter()
            .map(|c| Curve::Scaled { base: Box::new(c.clone()), factor })
            .collect();
        Self { horizon: self.horizon, curves, provenance: format!("{} x {factor}", self.provenance) }
    }

    /// Uniform grid `t_i = T * i / (points - 1)`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let points = points.max(2);
        let last = (points - 1) as f64;
        let mut grid: Vec<f64> = (0..points).map(|i| self.horizon * i as f64 / last).collect();
        grid[points - 1] = self.horizon;
        grid
    }

    /// Step-function copy sampled on the uniform grid; what the CSV export
    /// stores and what a grid-snapped replayer uses.
    pub fn snapshot(&self, points: usize) -> Self {
        let times: Arc<[f64]> = self.grid(points).into();
        let curves = self
            .curves
            .iter()
            .map(|c| Curve::Grid {
                values: times.iter().map(|&t| c.at(t, self.horizon)).collect(),
                times: Arc::clone(&times),
            })
            .collect();
        Self { horizon: self.horizon, curves, provenance: self.provenance.clone() }
    }

    /// Write `t,y_1,...,y_n` on a uniform grid of `points` rows.
    pub fn write_csv<W: Write>(&self, out: W, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.workers()).map(|k| format!("y_{k}")));
        w.write_record(&header)?;
        for t in self.grid(points) {
            let mut row = vec![t.to_string()];
            row.extend((1..=self.workers()).map(|k| self.threshold(k, t).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a `t,y_1,...,y_n` export as step-function curves. The last grid
    /// time is taken as the horizon.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.get(0) != Some("t") || headers.len() < 2 {
            return Err(Error::Schema("curve CSV needs header t,y_1,...,y_n".into()));
        }
        for (k, h) in headers.iter().skip(1).enumerate() {
            if h != format!("y_{}", k + 1) {
                return Err(Error::Schema(format!("unexpected curve column {h:?}")));
            }
        }
        let n = headers.len() - 1;
        let mut times = Vec::new();
        let mut values = vec![Vec::new(); n];
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|e| Error::Schema(format!("bad number {s:?}: {e}")))
            };
            let t = parse(&rec[0])?;
            if times.last().is_some_and(|&p| t <= p) {
                return Err(Error::Schema("curve grid times must increase".into()));
            }
            times.push(t);
            for k in 0..n {
                values[k].push(parse(&rec[k + 1])?);
            }
        }
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::Schema("curve grid must start at t = 0 and have two or more rows".into()));
        }
        let horizon = *times.last().unwrap();
        let times: Arc<[f64]> = times.into();
        let curves = values
            .into_iter()
            .map(|v| Curve::Grid { times: Arc::clone(&times), values: v })
            .collect();
        Self::from_curves(horizon, curves, "imported grid")
    }
}

/// Solve the critical-curve system for `n` workers.
///
/// Curve `k` satisfies `dy_k/dt = -lambda(t) (phi(y_k) - phi(y_{k-1}))`,
/// `y_k(T) = 0`, with `phi(y_0) = 0`. Each curve is integrated forward in
/// `s = T - t` and reads the previous curve through its dense output.
pub fn derive_critical_curves<V>(
    intensity: &IntensityFunction,
    phi: &V,
    n: usize,
    horizon: f64,
    config: &SolverConfig,
) -> Result<CriticalCurveSet>
where
    V: ValueModel + ?Sized,
{
    if n == 0 {
        return Err(invalid("number of workers must be at least 1"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let mut solutions: Vec<Arc<DenseSolution>> = Vec::with_capacity(n);
    for k in 1..=n {
        let prev = solutions.last().cloned();
        let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
            let above = match &prev {
                Some(p) => phi.shortage(p.eval_component(s, 0).max(0.0)),
                None => 0.0,
            };
            dy[0] = intensity.rate(horizon - s) * (phi.shortage(y[0]) - above);
        };
        let sol = solve_ivp(rhs, (0.0, horizon), &[0.0], config)
            .map_err(|source| Error::CurveSolve { k, source })?;
        solutions.push(Arc::new(sol));
    }
    let curves = solutions.into_iter().map(Curve::Dense).collect();
    CriticalCurveSet::from_curves(horizon, curves, format!("{n} curves over [0, {horizon}]"))
}
