//! Comparison policies for score-annotated streams, plus the realized-value
//! and captured-fraud metrics used to compare them.

use rand::seq::index::sample;
use rand::Rng;

use crate::arrival::{Event, Realization};
use crate::error::{invalid, Error, Result};
use crate::policy::ReplayResult;

pub const DEFAULT_POSITIVE_THRESHOLD: f64 = 0.5;

/// A realization in which every event carries a score and a label.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredStream {
    realization: Realization,
}

impl ScoredStream {
    pub fn new(realization: Realization) -> Result<Self> {
        if !realization.is_scored() {
            return Err(Error::Schema("every event of a scored stream needs a score and a label".into()));
        }
        Ok(Self { realization })
    }

    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    pub fn events(&self) -> &[Event] {
        self.realization.events()
    }

    /// Indices of events the discriminator marks positive.
    fn positives(&self, threshold: f64) -> Vec<usize> {
        self.events()
            .iter()
            .enumerate()
            .filter(|(_, e)| score(e) >= threshold)
            .map(|(i, _)| i)
            .collect()
    }

    fn frauds(&self) -> Vec<usize> {
        self.events().iter().enumerate().filter(|(_, e)| is_fraud(e)).map(|(i, _)| i).collect()
    }

    pub fn fraud_count(&self) -> usize {
        self.events().iter().filter(|e| is_fraud(e)).count()
    }

    pub fn fraud_value(&self) -> f64 {
        self.events().iter().filter(|e| is_fraud(e)).map(|e| e.value).sum()
    }
}

/// Score times raw value.
pub fn adjusted_value(e: &Event) -> f64 {
    e.score.unwrap_or(1.0) * e.value
}

fn score(e: &Event) -> f64 {
    e.score.unwrap_or(0.0)
}

fn is_fraud(e: &Event) -> bool {
    e.label == Some(1)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("number of workers must be at least 1"));
    }
    Ok(())
}

fn raw(e: &Event) -> f64 {
    e.value
}

/// Top `n` indices by raw value, ties to the earlier arrival.
fn top_by_value(stream: &ScoredStream, mut candidates: Vec<usize>, n: usize) -> Vec<usize> {
    let events = stream.events();
    candidates.sort_by(|&a, &b| events[b].value.total_cmp(&events[a].value).then(a.cmp(&b)));
    candidates.truncate(n);
    candidates
}

/// The first `n` events, in time order, scored at or above the threshold.
pub fn greedy(stream: &ScoredStream, n: usize, positive_threshold: f64) -> Result<ReplayResult> {
    check_n(n)?;
    let picks = stream.positives(positive_threshold).into_iter().take(n).collect();
    Ok(ReplayResult::from_indices(stream.realization(), picks, n, raw))
}

/// `min(n, #positives)` positives drawn uniformly without replacement.
/// Offline: it sees the whole stream first.
pub fn uniform<R: Rng + ?Sized>(
    stream: &ScoredStream,
    n: usize,
    positive_threshold: f64,
    rng: &mut R,
) -> Result<ReplayResult> {
    check_n(n)?;
    let positives = stream.positives(positive_threshold);
    let picks = if positives.len() <= n {
        positives
    } else {
        sample(rng, positives.len(), n).into_iter().map(|j| positives[j]).collect()
    };
    Ok(ReplayResult::from_indices(stream.realization(), picks, n, raw))
}

/// The `n` highest-valued positives.
pub fn hindsight(stream: &ScoredStream, n: usize, positive_threshold: f64) -> Result<ReplayResult> {
    check_n(n)?;
    let picks = top_by_value(stream, stream.positives(positive_threshold), n);
    Ok(ReplayResult::from_indices(stream.realization(), picks, n, raw))
}

/// The `n` highest-valued events whose true label is 1.
pub fn full_knowledge(stream: &ScoredStream, n: usize) -> Result<ReplayResult> {
    check_n(n)?;
    let picks = top_by_value(stream, stream.frauds(), n);
    Ok(ReplayResult::from_indices(stream.realization(), picks, n, raw))
}

/// Realized value and captured frauds for one replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FraudCapture {
    pub realized_value: f64,
    pub captured: usize,
    /// `realized_value / total fraud value`, `None` if the stream has no fraud.
    pub value_fraction: Option<f64>,
    pub count_fraction: Option<f64>,
}

pub fn fraud_capture(stream: &ScoredStream, result: &ReplayResult) -> FraudCapture {
    let events = stream.events();
    let (mut realized_value, mut captured) = (0.0, 0usize);
    for i in result.indices() {
        if is_fraud(&events[i]) {
            realized_value += events[i].value;
            captured += 1;
        }
    }
    let total_value = stream.fraud_value();
    let total_count = stream.fraud_count();
    FraudCapture {
        realized_value,
        captured,
        value_fraction: (total_value > 0.0).then(|| realized_value / total_value),
        count_fraction: (total_count > 0).then(|| captured as f64 / total_count as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream as rng_stream;

    fn scored(rows: &[(f64, f64, u8)]) -> ScoredStream {
        let events = rows
            .iter()
            .enumerate()
            .map(|(i, &(v, s, l))| Event::scored(0.1 * (i + 1) as f64, v, s, l))
            .collect();
        ScoredStream::new(Realization::new(events, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn unscored_stream_rejected() {
        let r = Realization::new(vec![Event::new(0.1, 1.0)], 1.0).unwrap();
        assert!(ScoredStream::new(r).is_err());
    }

    #[test]
    fn greedy_examples() {
        let s = scored(&[(1.0, 0.9, 1), (1.0, 0.2, 0), (1.0, 0.8, 1), (1.0, 0.95, 0)]);
        let r = greedy(&s, 2, 0.5).unwrap();
        assert_eq!(r.indices().collect::<Vec<_>>(), vec![0, 2]);
        let none = scored(&[(1.0, 0.1, 0), (2.0, 0.3, 1)]);
        assert_eq!(greedy(&none, 3, 0.5).unwrap().workers_used(), 0);
        let r = greedy(&s, 10, 0.5).unwrap();
        assert_eq!(r.workers_used(), 3);
        assert!(greedy(&s, 0, 0.5).is_err());
    }

    #[test]
    fn uniform_examples() {
        let s = scored(&[(1.0, 0.9, 1), (2.0, 0.2, 0), (3.0, 0.8, 1), (4.0, 0.95, 0)]);
        for seed in 0..20 {
            let r = uniform(&s, 5, 0.5, &mut rng_stream(seed, 0)).unwrap();
            assert_eq!(r.indices().collect::<Vec<_>>(), vec![0, 2, 3]);
        }
        let none = scored(&[(1.0, 0.1, 0)]);
        assert_eq!(uniform(&none, 1, 0.5, &mut rng_stream(1, 0)).unwrap().workers_used(), 0);
    }

    #[test]
    fn uniform_is_uniform() {
        let s = scored(&[(1.0, 0.9, 1), (2.0, 0.7, 0), (3.0, 0.8, 1), (4.0, 0.95, 0), (5.0, 0.1, 1)]);
        let k = 4;
        let trials = 10_000;
        let mut counts = vec![0usize; s.events().len()];
        for i in 0..trials {
            let r = uniform(&s, 1, 0.5, &mut rng_stream(77, i)).unwrap();
            counts[r.accepted[0].index] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &i in &[0, 1, 2, 3] {
            assert!((counts[i] as f64 - trials as f64 * p).abs() < 4.0 * sigma, "{counts:?}");
        }
        assert_eq!(counts[4], 0);
    }

    #[test]
    fn hindsight_examples() {
        let s = scored(&[(5.0, 0.9, 1), (50.0, 0.9, 0), (7.0, 0.6, 1), (100.0, 0.1, 1)]);
        let r = hindsight(&s, 2, 0.5).unwrap();
        let mut values: Vec<f64> = r.accepted.iter().map(|a| a.value).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, vec![7.0, 50.0]);
        assert!(hindsight(&s, 0, 0.5).is_err());
        let tie = scored(&[(3.0, 0.9, 1), (9.0, 0.9, 1), (9.0, 0.9, 1)]);
        assert_eq!(hindsight(&tie, 1, 0.5).unwrap().indices().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn full_knowledge_examples() {
        let s = scored(&[(3.0, 0.1, 1), (100.0, 0.9, 0), (4.0, 0.2, 1)]);
        let r = full_knowledge(&s, 1).unwrap();
        assert_eq!(r.total_reward, 4.0);
        let clean = scored(&[(3.0, 0.1, 0), (100.0, 0.9, 0)]);
        assert_eq!(full_knowledge(&clean, 2).unwrap().workers_used(), 0);
        assert_eq!(full_knowledge(&s, 5).unwrap().workers_used(), 2);
    }

    #[test]
    fn metrics() {
        let s = scored(&[(3.0, 0.9, 1), (100.0, 0.9, 0), (5.0, 0.2, 1)]);
        let r = greedy(&s, 2, 0.5).unwrap();
        let m = fraud_capture(&s, &r);
        assert_eq!(m.realized_value, 3.0);
        assert_eq!(m.captured, 1);
        assert_eq!(m.value_fraction, Some(3.0 / 8.0));
        assert_eq!(m.count_fraction, Some(0.5));
        let clean = scored(&[(3.0, 0.9, 0)]);
        assert_eq!(fraud_capture(&clean, &greedy(&clean, 1, 0.5).unwrap()).value_fraction, None);
    }

    #[test]
    fn perfect_scores_order_policies() {
        // score == label: full knowledge >= hindsight >= the others.
        let mut rng = rng_stream(5, 0);
        for trial in 0..50u64 {
            let rows: Vec<(f64, f64, u8)> = (0..30)
                .map(|_| {
                    let label = u8::from(rng.random::<f64>() < 0.3);
                    (rng.random::<f64>() * 100.0, f64::from(label), label)
                })
                .collect();
            let s = scored(&rows);
            let n = 1 + (trial % 6) as usize;
            let fk = fraud_capture(&s, &full_knowledge(&s, n).unwrap()).realized_value;
            let hs = fraud_capture(&s, &hindsight(&s, n, 0.5).unwrap()).realized_value;
            let gr = fraud_capture(&s, &greedy(&s, n, 0.5).unwrap()).realized_value;
            let un = fraud_capture(&s, &uniform(&s, n, 0.5, &mut rng).unwrap()).realized_value;
            assert!(fk >= hs && hs >= gr && hs >= un);
        }
    }
}
