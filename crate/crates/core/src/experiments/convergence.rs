use rayon::prelude::*;
use serde::Serialize;

use super::{fit_curves, simulate_batch, streams, ExperimentConfig};
use crate::error::Result;
use crate::policy::{derive_critical_curves, optimal_reward, replay_policy};
use crate::rng::derive_seed;
use crate::stats::mean_se;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub n: usize,
    /// Mean over test realizations of realized reward divided by the
    /// optimal expected reward.
    pub mean_normalized_reward: f64,
    /// `NaN` with a single test realization.
    pub standard_error: f64,
    /// Running mean of `mean_normalized_reward` over the sweep up to `m`.
    pub cesaro_average: f64,
    pub optimal_reward: f64,
}

/// For each `M` in the sweep: fit on `M` simulated realizations, derive the
/// curves, and replay them on `M'` test realizations drawn independently of
/// all training data. Rows are sorted by `(n, M)`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let intensity = cfg.intensity()?;
    let dist = cfg.value_distribution()?;
    let solver = cfg.solver();
    let max_n = cfg.max_workers();
    let exact = derive_critical_curves(&intensity, &dist, max_n, cfg.horizon, &solver)?;
    let best: Vec<f64> = cfg
        .workers
        .iter()
        .map(|&n| exact.truncated(n).map(|c| optimal_reward(&c)))
        .collect::<Result<_>>()?;

    // One test set shared by every M, so differences along the sweep come
    // from the fits rather than from the test streams.
    let test = simulate_batch(
        &intensity,
        &dist,
        cfg.horizon,
        derive_seed(cfg.seed, &[streams::TEST]),
        cfg.test_realizations,
    )?;

    let cells: Vec<Vec<(usize, usize, f64, f64)>> = cfg
        .sweep()
        .into_par_iter()
        .map(|m| -> Result<Vec<(usize, usize, f64, f64)>> {
            let m_id = m as u64;
            let train = simulate_batch(
                &intensity,
                &dist,
                cfg.horizon,
                derive_seed(cfg.seed, &[streams::TRAIN, m_id]),
                m,
            )?;
            let fitted = fit_curves(&train, cfg.horizon, max_n, |e| e.value, &solver)?;
            cfg.workers
                .iter()
                .zip(&best)
                .map(|(&n, &r_star)| {
                    let curves = fitted.truncated(n)?;
                    let normalized = test
                        .iter()
                        .map(|r| replay_policy(&curves, r, |e| e.value).map(|res| res.total_reward / r_star))
                        .collect::<Result<Vec<f64>>>()?;
                    let (mean, se) = mean_se(&normalized);
                    Ok((m, n, mean, se))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (j, (&n, &r_star)) in cfg.workers.iter().zip(&best).enumerate() {
        let mut running = 0.0;
        for (i, cell) in cells.iter().enumerate() {
            let (m, _, mean, se) = cell[j];
            running += mean;
            rows.push(ConvergenceRow {
                m,
                n,
                mean_normalized_reward: mean,
                standard_error: se,
                cesaro_average: running / (i + 1) as f64,
                optimal_reward: r_star,
            });
        }
    }
    rows.sort_by_key(|r| (r.n, r.m));
    rows.dedup_by_key(|r| (r.n, r.m));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            train_realizations: 4,
            test_realizations: 5,
            workers: vec![1, 2],
            ..ExperimentConfig::convergence()
        }
    }

    #[test]
    fn table_shape_and_cesaro() {
        let rows = run_convergence(&small()).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].n, rows[0].m), (1, 1));
        assert_eq!((rows[7].n, rows[7].m), (2, 4));
        let first: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.n == 1).collect();
        let mean = first.iter().map(|r| r.mean_normalized_reward).sum::<f64>() / 4.0;
        assert!((first[3].cesaro_average - mean).abs() < 1e-12);
        assert!((first[0].optimal_reward - 5.0 * (1.0 + 2.0 * std::f64::consts::PI).ln()).abs() < 1e-4);
        for r in &rows {
            assert!(r.mean_normalized_reward >= 0.0 && r.standard_error.is_finite());
        }
    }

    #[test]
    fn single_test_realization_has_nan_se() {
        let cfg = ExperimentConfig { test_realizations: 1, m_sweep: vec![3], ..small() };
        let rows = run_convergence(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.standard_error.is_nan()));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            format!("{:?}", run_convergence(&small()).unwrap()),
            format!("{:?}", run_convergence(&small()).unwrap())
        );
    }
}
