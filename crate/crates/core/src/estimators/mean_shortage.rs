use std::io::Write;

use crate::error::{Error, Result};
use crate::value_dist::ValueModel;

/// Mean shortage function of the empirical distribution of a sample.
///
/// `phis[i]` is the tail integral of `1 - F_N` from `xs[i]` to infinity, so
/// evaluation is a binary search plus one linear segment. Tied samples are
/// kept; their gaps are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShortageCache {
    xs: Vec<f64>,
    phis: Vec<f64>,
    sample_mean: f64,
}

impl MeanShortageCache {
    pub fn build(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("mean shortage samples"));
        }
        if let Some(&bad) = samples.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::NegativeInput { what: "value sample", value: bad });
        }
        samples.sort_unstable_by(f64::total_cmp);
        let n = samples.len();
        let nf = n as f64;
        let mut phis = vec![0.0; n];
        for i in (0..n - 1).rev() {
            // Right of xs[i] (and up to xs[i+1]) exactly n - i - 1 samples are larger.
            phis[i] = phis[i + 1] + (samples[i + 1] - samples[i]) * (n - i - 1) as f64 / nf;
        }
        let sample_mean = samples.iter().sum::<f64>() / nf;
        Ok(Self { xs: samples, phis, sample_mean })
    }

    pub fn samples(&self) -> &[f64] {
        &self.xs
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn sample_mean(&self) -> f64 {
        self.sample_mean
    }

    /// `phi_N(y)`; rejects negative `y`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        if y < 0.0 || y.is_nan() {
            return Err(Error::NegativeInput { what: "mean shortage argument", value: y });
        }
        Ok(self.shortage(y))
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.xs.partition_point(|&s| s <= x) as f64 / self.xs.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "phi"])?;
        for (x, phi) in self.xs.iter().zip(&self.phis) {
            w.write_record([x.to_string(), phi.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuild from an `x,phi` export; only the `x` column is needed.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let col = headers
            .iter()
            .position(|h| h == "x")
            .ok_or_else(|| Error::Schema("mean shortage CSV needs an `x` column".into()))?;
        let mut xs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let x: f64 = rec[col]
                .trim()
                .parse()
                .map_err(|e| Error::Schema(format!("bad x value {:?}: {e}", &rec[col])))?;
            xs.push(x);
        }
        Self::build(xs)
    }
}

impl ValueModel for MeanShortageCache {
    fn shortage(&self, y: f64) -> f64 {
        let n = self.xs.len();
        if y >= self.xs[n - 1] {
            return 0.0;
        }
        if y <= self.xs[0] {
            return self.sample_mean - y;
        }
        // xs[l] <= y < xs[l + 1]
        let l = self.xs.partition_point(|&s| s <= y) - 1;
        self.phis[l + 1] + (self.xs[l + 1] - y) * (n - l - 1) as f64 / n as f64
    }

    fn survival(&self, y: f64) -> f64 {
        1.0 - self.ecdf(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let c = MeanShortageCache::build(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.samples(), &[1.0, 2.0, 3.0]);
        let expect = [1.0, 1.0 / 3.0, 0.0];
        for (p, e) in c.phis().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(MeanShortageCache::build(vec![4.2]).unwrap().phis(), &[0.0]);
        assert_eq!(MeanShortageCache::build(vec![5.0; 3]).unwrap().phis(), &[0.0; 3]);
        assert!(matches!(MeanShortageCache::build(vec![]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            MeanShortageCache::build(vec![1.0, -0.5]),
            Err(Error::NegativeInput { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let c = MeanShortageCache::build(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 2.0);
        assert!((c.eval(1.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.eval(10.0).unwrap(), 0.0);
        assert_eq!(c.eval(3.0).unwrap(), 0.0);
        assert!((c.eval(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.eval(-1.0).is_err());
    }

    #[test]
    fn ecdf_examples() {
        let c = MeanShortageCache::build(vec![1.0, 2.0, 3.0]).unwrap();
        assert!((c.ecdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.ecdf(0.5), 0.0);
        assert_eq!(c.ecdf(3.0), 1.0);
    }

    #[test]
    fn cache_invariants_with_ties() {
        let c = MeanShortageCache::build(vec![0.0, 2.0, 2.0, 5.0, 9.0, 9.0]).unwrap();
        let p = c.phis();
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*p.last().unwrap(), 0.0);
        assert!((p[0] + c.samples()[0] - c.sample_mean()).abs() < 1e-12);
        assert_eq!(c.eval(0.0).unwrap(), c.sample_mean());
    }

    #[test]
    fn csv_round_trip() {
        let c = MeanShortageCache::build(vec![0.25, 7.0, 1.0 / 3.0, 7.0]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,phi\n"));
        let back = MeanShortageCache::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }
}
