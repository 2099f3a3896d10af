use std::io::Write;

use crate::arrival::{bin_count, bin_index, IntensityFunction, Realization};
use crate::error::{invalid, Error, Result};

/// Histogram estimate of the arrival rate averaged over `M` realizations,
/// with bin width `T * M^(-1/3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityEstimate {
    delta: f64,
    rates: Vec<f64>,
    horizon: f64,
    realizations: usize,
}

impl IntensityEstimate {
    pub fn fit(realizations: &[Realization], horizon: f64) -> Result<Self> {
        if realizations.is_empty() {
            return Err(Error::EmptyInput("intensity estimation needs at least one realization"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let m = realizations.len();
        let delta = horizon * (m as f64).powf(-1.0 / 3.0);
        let bins = bin_count(horizon, delta);
        let mut counts = vec![0usize; bins];
        for r in realizations {
            if (r.horizon() - horizon).abs() > 1e-12 * horizon {
                return Err(invalid(format!(
                    "realization horizon {} differs from {horizon}",
                    r.horizon()
                )));
            }
            for e in r.events() {
                if !(0.0..=horizon).contains(&e.t) {
                    return Err(Error::EventOutOfRange { t: e.t, horizon });
                }
                counts[bin_index(e.t, delta, bins)] += 1;
            }
        }
        let rates = counts
            .iter()
            .enumerate()
            .map(|(b, &c)| c as f64 / (m as f64 * bin_width(b, bins, delta, horizon)))
            .collect();
        Ok(Self { delta, rates, horizon, realizations: m })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.rates[bin_index(t, self.delta, self.rates.len())]
    }

    /// `(start, end, rate)` per bin; the last bin ends at the horizon.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let bins = self.rates.len();
        self.rates.iter().enumerate().map(move |(b, &r)| {
            let start = b as f64 * self.delta;
            let end = if b + 1 == bins { self.horizon } else { (b + 1) as f64 * self.delta };
            (start, end, r)
        })
    }

    /// The estimate as a piecewise-constant intensity for the simulator and
    /// the curve solver.
    pub fn to_intensity(&self) -> IntensityFunction {
        IntensityFunction::PiecewiseConstant { bin_width: self.delta, rates: self.rates.clone() }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_start", "bin_end", "rate"])?;
        for (a, b, r) in self.bins() {
            w.write_record([a.to_string(), b.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a `bin_start,bin_end,rate` export back as a piecewise intensity and
/// its horizon. Bins must be contiguous from 0 with a common width (the last
/// may be shorter).
pub fn read_intensity_csv<R: std::io::Read>(input: R) -> Result<(IntensityFunction, f64)> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("intensity CSV is missing column `{name}`")))
    };
    let (ia, ib, ir) = (find("bin_start")?, find("bin_end")?, find("rate")?);
    let parse = |s: &str| -> Result<f64> {
        s.trim().parse().map_err(|e| Error::Schema(format!("bad number {s:?}: {e}")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push((parse(&rec[ia])?, parse(&rec[ib])?, parse(&rec[ir])?));
    }
    let Some(&(first_start, first_end, _)) = rows.first() else {
        return Err(Error::Schema("intensity CSV has no bins".into()));
    };
    if first_start != 0.0 {
        return Err(Error::Schema("first bin must start at 0".into()));
    }
    let width = first_end - first_start;
    let horizon = rows.last().map(|r| r.1).unwrap_or(first_end);
    for (i, w) in rows.windows(2).enumerate() {
        if w[0].1 != w[1].0 {
            return Err(Error::Schema(format!("bins {i} and {} are not contiguous", i + 1)));
        }
    }
    let rates = rows.into_iter().map(|r| r.2).collect();
    Ok((IntensityFunction::piecewise_over(horizon, width, rates)?, horizon))
}

fn bin_width(b: usize, bins: usize, delta: f64, horizon: f64) -> f64 {
    if b + 1 == bins {
        horizon - b as f64 * delta
    } else {
        delta
    }
}
