use std::f64::consts::PI;

use proptest::prelude::*;

use npsa_core::arrival::{Event, IntensityFunction, Realization};
use npsa_core::experiments::{fit_curves, simulate_batch};
use npsa_core::ode::SolverConfig;
use npsa_core::policy::{derive_critical_curves, expected_reward, optimal_reward, replay_policy, CriticalCurveSet};
use npsa_core::stats::mean_se;
use npsa_core::value_dist::ValueDistribution;

const T: f64 = 2.0 * PI;

fn scenario() -> (IntensityFunction, ValueDistribution) {
    (IntensityFunction::constant(1.0).unwrap(), ValueDistribution::exponential(5.0).unwrap())
}

fn mc_reward(curves: &CriticalCurveSet, test: &[Realization]) -> (f64, f64) {
    let rewards: Vec<f64> = test.iter().map(|r| replay_policy(curves, r, |e| e.value).unwrap().total_reward).collect();
    mean_se(&rewards)
}

#[test]
fn perturbed_curves_agree_with_monte_carlo() {
    let (lambda, dist) = scenario();
    let solver = SolverConfig::default();
    let curves = derive_critical_curves(&lambda, &dist, 3, T, &solver).unwrap();
    let test = simulate_batch(&lambda, &dist, T, 99, 10_000).unwrap();
    for factor in [0.5, 1.5] {
        let perturbed = curves.scaled(factor);
        let ode = expected_reward(&perturbed, &lambda, &dist, &solver).unwrap();
        let (mean, se) = mc_reward(&perturbed, &test);
        assert!((mean - ode).abs() < 3.0 * se, "factor {factor}: {mean} +- {se} vs {ode}");
        assert!(ode < optimal_reward(&curves));
    }
}

#[test]
fn more_workers_never_hurt() {
    let (lambda, dist) = scenario();
    let solver = SolverConfig::default();
    let curves = derive_critical_curves(&lambda, &dist, 10, T, &solver).unwrap();
    let rewards: Vec<f64> = (1..=10).map(|n| optimal_reward(&curves.truncated(n).unwrap())).collect();
    for w in rewards.windows(2) {
        assert!(w[1] >= w[0], "{rewards:?}");
    }
    // The total never exceeds the expected sum of every arrival's value.
    assert!(rewards[9] <= 5.0 * T);
}

#[test]
fn estimated_inputs_are_near_optimal() {
    let (lambda, dist) = scenario();
    let solver = SolverConfig::default();
    let train = simulate_batch(&lambda, &dist, T, 1234, 100).unwrap();
    for n in [1, 5] {
        let fitted = fit_curves(&train, T, n, |e| e.value, &solver).unwrap();
        let exact = derive_critical_curves(&lambda, &dist, n, T, &solver).unwrap();
        let ratio = expected_reward(&fitted, &lambda, &dist, &solver).unwrap() / optimal_reward(&exact);
        assert!((0.9..=1.0 + 1e-6).contains(&ratio), "n={n}: {ratio}");
    }
}

#[test]
fn lomax_reward_identity() {
    let lambda = IntensityFunction::piecewise(T / 4.0, vec![0.5, 2.0, 1.0, 3.0]).unwrap();
    let dist = ValueDistribution::lomax(3.5, 5.0).unwrap();
    let solver = SolverConfig::default();
    let curves = derive_critical_curves(&lambda, &dist, 4, T, &solver).unwrap();
    let total = optimal_reward(&curves);
    let ode = expected_reward(&curves, &lambda, &dist, &solver).unwrap();
    assert!((ode - total).abs() / total < 1e-3, "{ode} vs {total}");
}

fn events(times_values: Vec<(f64, f64)>) -> Realization {
    let mut tv = times_values;
    tv.sort_by(|a, b| a.0.total_cmp(&b.0));
    tv.dedup_by(|a, b| a.0 == b.0);
    Realization::new(tv.into_iter().map(|(t, v)| Event::new(t, v)).collect(), T).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replay_respects_thresholds(
        tv in prop::collection::vec((0.0f64..T, 0.0f64..40.0), 0..40),
        n in 1usize..6,
    ) {
        let (lambda, dist) = scenario();
        let curves = derive_critical_curves(&lambda, &dist, n, T, &SolverConfig::default()).unwrap();
        let r = events(tv);
        let out = replay_policy(&curves, &r, |e| e.value).unwrap();
        prop_assert!(out.workers_used() <= n);
        let mut remaining = n;
        let mut accepted = out.accepted.iter().peekable();
        for (i, e) in r.events().iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let take = e.value > curves.threshold(remaining, e.t);
            if take {
                let a = accepted.next().unwrap();
                prop_assert_eq!(a.index, i);
                prop_assert_eq!(a.worker, remaining);
                remaining -= 1;
            }
        }
        prop_assert!(accepted.next().is_none());
        let sum: f64 = out.accepted.iter().map(|a| a.value).sum();
        prop_assert!((sum - out.total_reward).abs() < 1e-12);
    }

    #[test]
    fn curves_are_ordered_and_decreasing(rate in 0.2f64..20.0, mean in 0.5f64..50.0, n in 1usize..6) {
        let lambda = IntensityFunction::constant(rate).unwrap();
        let dist = ValueDistribution::exponential(mean).unwrap();
        let curves = derive_critical_curves(&lambda, &dist, n, T, &SolverConfig::default()).unwrap();
        let grid = curves.grid(128);
        for k in 1..=n {
            prop_assert!(curves.threshold(k, T).abs() < 1e-9);
            for w in grid.windows(2) {
                prop_assert!(curves.threshold(k, w[1]) <= curves.threshold(k, w[0]) + 1e-9);
                if k < n {
                    prop_assert!(curves.threshold(k + 1, w[0]) <= curves.threshold(k, w[0]) + 1e-6);
                }
            }
        }
    }
}
