use crate::arrival::{Event, Realization};
use crate::error::{invalid, Result};
use crate::policy::CriticalCurveSet;

/// One accepted job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    /// Number of workers remaining just before this acceptance (`n` down to 1).
    pub worker: usize,
    /// Position of the event in its realization.
    pub index: usize,
    pub t: f64,
    /// The value the policy was scored on.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplayResult {
    pub accepted: Vec<Acceptance>,
    pub total_reward: f64,
}

impl ReplayResult {
    /// Build from accepted event indices, assigning workers `n, n-1, ...` in
    /// time order.
    pub(crate) fn from_indices<F>(realization: &Realization, mut indices: Vec<usize>, n: usize, value_of: F) -> Self
    where
        F: Fn(&Event) -> f64,
    {
        indices.sort_unstable();
        let events = realization.events();
        let accepted: Vec<Acceptance> = indices
            .into_iter()
            .enumerate()
            .map(|(j, i)| Acceptance { worker: n - j, index: i, t: events[i].t, value: value_of(&events[i]) })
            .collect();
        let total_reward = accepted.iter().map(|a| a.value).sum();
        Self { accepted, total_reward }
    }

    pub fn workers_used(&self) -> usize {
        self.accepted.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepted.iter().map(|a| a.index)
    }
}

/// Run the threshold policy over one realization in time order. With `k`
/// workers left, an event is accepted iff `value_of(event) > y_k(t)`.
pub fn replay_policy<F>(curves: &CriticalCurveSet, realization: &Realization, value_of: F) -> Result<ReplayResult>
where
    F: Fn(&Event) -> f64,
{
    let horizon = curves.horizon();
    if (realization.horizon() - horizon).abs() > 1e-9 * horizon {
        return Err(invalid(format!(
            "realization horizon {} does not match curve horizon {horizon}",
            realization.horizon()
        )));
    }
    let mut remaining = curves.workers();
    let mut out = ReplayResult::default();
    for (index, event) in realization.events().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let value = value_of(event);
        if value > curves.threshold(remaining, event.t) {
            out.accepted.push(Acceptance { worker: remaining, index, t: event.t, value });
            out.total_reward += value;
            remaining -= 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrival::IntensityFunction;
    use crate::ode::SolverConfig;
    use crate::policy::derive_critical_curves;
    use crate::value_dist::ValueDistribution;
    use std::f64::consts::PI;

    fn exp_curves(n: usize) -> CriticalCurveSet {
        let lambda = IntensityFunction::constant(1.0).unwrap();
        let dist = ValueDistribution::exponential(5.0).unwrap();
        derive_critical_curves(&lambda, &dist, n, 2.0 * PI, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn empty_realization() {
        let r = replay_policy(&exp_curves(1), &Realization::empty(2.0 * PI).unwrap(), |e| e.value).unwrap();
        assert!(r.accepted.is_empty());
        assert_eq!(r.total_reward, 0.0);
    }

    #[test]
    fn near_terminal_time_accepts_anything_positive() {
        let t = 2.0 * PI - 1e-9;
        let real = Realization::new(vec![Event::new(t, 1e9)], 2.0 * PI).unwrap();
        let r = replay_policy(&exp_curves(1), &real, |e| e.value).unwrap();
        assert_eq!(r.workers_used(), 1);
        assert_eq!(r.accepted[0].worker, 1);
    }

    #[test]
    fn compares_against_closed_form_threshold() {
        let curves = exp_curves(1);
        let low = Realization::new(vec![Event::new(0.0, 9.0)], 2.0 * PI).unwrap();
        assert_eq!(replay_policy(&curves, &low, |e| e.value).unwrap().workers_used(), 0);
        let high = Realization::new(vec![Event::new(0.0, 10.0)], 2.0 * PI).unwrap();
        let r = replay_policy(&curves, &high, |e| e.value).unwrap();
        assert_eq!(r.total_reward, 10.0);
    }

    #[test]
    fn ties_are_rejected_and_budget_is_respected() {
        let curves = CriticalCurveSet::constant(2, 1.0, 3.0).unwrap();
        let events = vec![
            Event::new(0.1, 3.0),
            Event::new(0.2, 4.0),
            Event::new(0.3, 5.0),
            Event::new(0.4, 6.0),
        ];
        let real = Realization::new(events, 1.0).unwrap();
        let r = replay_policy(&curves, &real, |e| e.value).unwrap();
        assert_eq!(r.indices().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(r.accepted.iter().map(|a| a.worker).collect::<Vec<_>>(), vec![2, 1]);
        assert_eq!(r.total_reward, 9.0);
        let never = CriticalCurveSet::constant(2, 1.0, f64::INFINITY).unwrap();
        assert_eq!(replay_policy(&never, &real, |e| e.value).unwrap().workers_used(), 0);
        let other = Realization::empty(2.0).unwrap();
        assert!(replay_policy(&curves, &other, |e| e.value).is_err());
    }
}
