use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{fit_curves, streams, ExperimentConfig};
use crate::arrival::{simulate, Event, IntensityFunction, Realization};
use crate::baselines::{adjusted_value, fraud_capture, full_knowledge, greedy, hindsight, uniform, ScoredStream};
use crate::error::{invalid, Result};
use crate::ode::SolverConfig;
use crate::policy::{replay_policy, ReplayResult};
use crate::rng::{derive_seed, stream};
use crate::stats::mean_se;
use crate::value_dist::ValueDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Fitted thresholds applied to adjusted values.
    Npsa,
    Greedy,
    Uniform,
    Hindsight,
    FullKnowledge,
}

impl Policy {
    pub const ALL: [Policy; 5] = [Policy::Npsa, Policy::Greedy, Policy::Uniform, Policy::Hindsight, Policy::FullKnowledge];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FraudRow {
    pub n: usize,
    pub policy: Policy,
    /// Test realizations containing at least one fraud; the fractions are
    /// averaged over these.
    pub realizations: usize,
    pub value_fraction_mean: f64,
    pub value_fraction_se: f64,
    pub count_fraction_mean: f64,
    pub count_fraction_se: f64,
    /// Raw fraud value captured, averaged over all test realizations.
    pub realized_value_mean: f64,
}

/// Fit the rate on all training events and the mean shortage on adjusted
/// values, then replay the fitted policy and the four baselines on each test
/// realization for every `n`. Rows are sorted by `(n, policy)`.
pub fn run_fraud_replay(
    train: &[Realization],
    test: &[Realization],
    n_list: &[usize],
    positive_threshold: f64,
    seed: u64,
    solver: &SolverConfig,
) -> Result<Vec<FraudRow>> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(invalid("worker counts must be a nonempty list of values >= 1"));
    }
    let Some(first) = train.first() else {
        return Err(crate::Error::EmptyInput("fraud replay needs training realizations"));
    };
    let horizon = first.horizon();
    for r in train {
        ScoredStream::new(r.clone())?;
    }
    let test: Vec<ScoredStream> = test.iter().cloned().map(ScoredStream::new).collect::<Result<_>>()?;
    if test.is_empty() {
        return Err(crate::Error::EmptyInput("fraud replay needs test realizations"));
    }
    let max_n = n_list.iter().copied().max().unwrap_or(1);
    let fitted = fit_curves(train, horizon, max_n, adjusted_value, solver)?;

    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let nested: Vec<Vec<FraudRow>> = n_sorted
        .into_par_iter()
        .map(|n| -> Result<Vec<FraudRow>> {
            let curves = fitted.truncated(n)?;
            let mut per_policy: Vec<Vec<crate::baselines::FraudCapture>> = vec![Vec::new(); Policy::ALL.len()];
            for (i, s) in test.iter().enumerate() {
                let mut rng = stream(derive_seed(seed, &[streams::UNIFORM, n as u64]), i as u64);
                for (p, policy) in Policy::ALL.iter().enumerate() {
                    let result: ReplayResult = match policy {
                        Policy::Npsa => replay_policy(&curves, s.realization(), adjusted_value)?,
                        Policy::Greedy => greedy(s, n, positive_threshold)?,
                        Policy::Uniform => uniform(s, n, positive_threshold, &mut rng)?,
                        Policy::Hindsight => hindsight(s, n, positive_threshold)?,
                        Policy::FullKnowledge => full_knowledge(s, n)?,
                    };
                    per_policy[p].push(fraud_capture(s, &result));
                }
            }
            Ok(Policy::ALL
                .iter()
                .zip(per_policy)
                .map(|(&policy, caps)| {
                    let values: Vec<f64> = caps.iter().filter_map(|c| c.value_fraction).collect();
                    let counts: Vec<f64> = caps.iter().filter_map(|c| c.count_fraction).collect();
                    let realized: Vec<f64> = caps.iter().map(|c| c.realized_value).collect();
                    let (value_fraction_mean, value_fraction_se) = mean_se(&values);
                    let (count_fraction_mean, count_fraction_se) = mean_se(&counts);
                    FraudRow {
                        n,
                        policy,
                        realizations: counts.len(),
                        value_fraction_mean,
                        value_fraction_se,
                        count_fraction_mean,
                        count_fraction_se,
                        realized_value_mean: mean_se(&realized).0,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<FraudRow> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.n, r.policy));
    Ok(rows)
}

/// Generator for score-annotated streams standing in for a scored
/// transaction log.
///
/// Arrivals are homogeneous Poisson; each event is fraudulent with
/// probability `fraud_rate` and its value is `value_floor` plus a draw from
/// `values`. With `perfect_scores` the score equals the label. Otherwise
/// frauds score in `U(0.6, 1)` with probability 0.9 and in `U(0, 0.5)`
/// otherwise, and legitimate events score in `U(0, 0.4)` with probability
/// 0.95 and in `U(0.5, 1)` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFraud {
    pub intensity: IntensityFunction,
    pub values: ValueDistribution,
    pub horizon: f64,
    pub fraud_rate: f64,
    pub value_floor: f64,
    pub perfect_scores: bool,
}

impl SyntheticFraud {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            intensity: cfg.intensity()?,
            values: cfg.value_distribution()?,
            horizon: cfg.horizon,
            fraud_rate: cfg.fraud_rate,
            value_floor: cfg.value_floor,
            perfect_scores: cfg.perfect_scores,
        })
    }

    fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Realization> {
        let base = simulate(&self.intensity, &self.values, self.horizon, rng)?;
        let events = base
            .events()
            .iter()
            .map(|e| {
                let fraud = rng.random::<f64>() < self.fraud_rate;
                let score = if self.perfect_scores {
                    f64::from(u8::from(fraud))
                } else {
                    let u: f64 = rng.random();
                    match (fraud, rng.random::<f64>()) {
                        (true, p) if p < 0.9 => 0.6 + 0.4 * u,
                        (true, _) => 0.5 * u,
                        (false, p) if p < 0.95 => 0.4 * u,
                        (false, _) => 0.5 + 0.5 * u,
                    }
                };
                Event::scored(e.t, self.value_floor + e.value, score, u8::from(fraud))
            })
            .collect();
        Realization::new(events, self.horizon)
    }
}

/// `count` scored realizations, realization `i` drawn from stream `i` of `seed`.
pub fn synthetic_scored_streams(spec: &SyntheticFraud, seed: u64, count: usize) -> Result<Vec<Realization>> {
    (0..count)
        .into_par_iter()
        .map(|i| spec.generate(&mut stream(seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(perfect: bool) -> SyntheticFraud {
        SyntheticFraud::from_config(&ExperimentConfig { perfect_scores: perfect, ..ExperimentConfig::fraud() }).unwrap()
    }

    #[test]
    fn synthetic_streams_are_scored() {
        let rs = synthetic_scored_streams(&spec(false), 3, 4).unwrap();
        assert_eq!(rs.len(), 4);
        for r in &rs {
            assert!(r.is_scored() && !r.is_empty());
            assert!(r.events().iter().all(|e| e.value >= 1.0 && (0.0..=1.0).contains(&e.score.unwrap())));
        }
        let frauds: usize = rs.iter().flat_map(|r| r.events()).filter(|e| e.label == Some(1)).count();
        let total: usize = rs.iter().map(Realization::len).sum();
        assert!((frauds as f64 / total as f64 - 0.1).abs() < 0.05);
    }

    #[test]
    fn table_shape() {
        let s = spec(false);
        let train = synthetic_scored_streams(&s, 1, 5).unwrap();
        let test = synthetic_scored_streams(&s, 2, 5).unwrap();
        let rows = run_fraud_replay(&train, &test, &[3, 1], 0.5, 0, &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!((rows[0].n, rows[0].policy), (1, Policy::Npsa));
        assert_eq!((rows[9].n, rows[9].policy), (3, Policy::FullKnowledge));
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.value_fraction_mean), "{r:?}");
        }
        assert!(run_fraud_replay(&train, &test, &[0], 0.5, 0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn unscored_input_rejected() {
        let r = Realization::new(vec![Event::new(0.5, 1.0)], 1.0).unwrap();
        let one = std::slice::from_ref(&r);
        assert!(run_fraud_replay(one, one, &[1], 0.5, 0, &SolverConfig::default()).is_err());
    }
}
