use crate::arrival::IntensityFunction;
use crate::error::Result;
use crate::ode::{solve_ivp, SolverConfig};
use crate::policy::CriticalCurveSet;
use crate::value_dist::ValueModel;

/// Expected total reward of replaying `curves` from `t = 0` when jobs arrive
/// at `true_intensity` with values from `true_values`.
///
/// With `E_k(t)` the expected reward still to come while `k` workers remain,
/// `dE_k/dt = -lambda(t) [H(y_k) - Fbar(y_k) (E_k - E_{k-1})]`, `E_k(T) = 0`,
/// `E_0 = 0`, where `H(y) = E[X; X > y]` and `Fbar(y) = P(X > y)`. All `n`
/// components are integrated together in reversed time.
pub fn expected_reward<V>(
    curves: &CriticalCurveSet,
    true_intensity: &IntensityFunction,
    true_values: &V,
    config: &SolverConfig,
) -> Result<f64>
where
    V: ValueModel + ?Sized,
{
    let n = curves.workers();
    let horizon = curves.horizon();
    let rhs = |s: f64, e: &[f64], de: &mut [f64]| {
        let t = horizon - s;
        let rate = true_intensity.rate(t);
        let mut below = 0.0;
        for k in 0..n {
            let y = curves.threshold(k + 1, t);
            let (h, fbar) = if y.is_finite() {
                (true_values.partial_mean(y), true_values.survival(y))
            } else {
                (0.0, 0.0)
            };
            de[k] = rate * (h - fbar * (e[k] - below));
            below = e[k];
        }
    };
    let sol = solve_ivp(rhs, (0.0, horizon), &vec![0.0; n], config)?;
    Ok(sol.final_state()[n - 1])
}

/// `sum_k y_k(0)`, the expected reward of the optimal curves.
pub fn optimal_reward(curves: &CriticalCurveSet) -> f64 {
    curves.total(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::derive_critical_curves;
    use crate::value_dist::ValueDistribution;
    use std::f64::consts::PI;

    #[test]
    fn optimal_curves_satisfy_sum_identity() {
        let lambda = IntensityFunction::constant(1.0).unwrap();
        let dist = ValueDistribution::exponential(5.0).unwrap();
        let cfg = SolverConfig::default();
        for n in [1, 2, 5] {
            let curves = derive_critical_curves(&lambda, &dist, n, 2.0 * PI, &cfg).unwrap();
            let e = expected_reward(&curves, &lambda, &dist, &cfg).unwrap();
            let r = optimal_reward(&curves);
            assert!(((e - r) / r).abs() < 1e-3, "n={n}: {e} vs {r}");
        }
    }

    #[test]
    fn closed_form_n1() {
        let lambda = IntensityFunction::constant(1.0).unwrap();
        let dist = ValueDistribution::exponential(5.0).unwrap();
        let cfg = SolverConfig::default();
        let curves = derive_critical_curves(&lambda, &dist, 1, 2.0 * PI, &cfg).unwrap();
        let e = expected_reward(&curves, &lambda, &dist, &cfg).unwrap();
        assert!(((e - 9.92784) / 9.92784).abs() < 1e-3);
        assert!((optimal_reward(&curves) - 9.92784).abs() < 1e-4);
        assert_eq!(curves.total(2.0 * PI), 0.0);
    }

    #[test]
    fn never_accepting_earns_nothing() {
        let lambda = IntensityFunction::constant(1.0).unwrap();
        let dist = ValueDistribution::exponential(5.0).unwrap();
        let never = CriticalCurveSet::constant(3, 2.0 * PI, f64::INFINITY).unwrap();
        assert_eq!(expected_reward(&never, &lambda, &dist, &SolverConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn accept_everything_single_worker() {
        // Zero threshold with one worker: reward is mu * P(at least one arrival).
        let lambda = IntensityFunction::constant(0.5).unwrap();
        let dist = ValueDistribution::exponential(3.0).unwrap();
        let zero = CriticalCurveSet::constant(1, 2.0, 0.0).unwrap();
        let e = expected_reward(&zero, &lambda, &dist, &SolverConfig::default()).unwrap();
        let exact = 3.0 * (1.0 - (-1.0f64).exp());
        assert!((e - exact).abs() < 1e-6, "{e} vs {exact}");
    }
}
