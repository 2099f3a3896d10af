use rayon::prelude::*;
use serde::Serialize;

use super::{fit_curves, simulate_batch, streams, ExperimentConfig};
use crate::error::Result;
use crate::policy::{derive_critical_curves, expected_reward, optimal_reward, replay_policy};
use crate::rng::derive_seed;
use crate::stats::mean_se;

/// Which test-time parameter is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Arrival rate `lambda' = delta * lambda`.
    Rate,
    /// Value mean `mu' = delta * mu`.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub sweep: Sweep,
    pub delta: f64,
    pub n: usize,
    /// Monte-Carlo mean of realized reward over `M'` test streams, divided
    /// by the optimal expected reward of the shifted scenario.
    pub mean_normalized_reward: f64,
    pub standard_error: f64,
    /// Noise-free expected reward of the trained curves in the shifted
    /// scenario, same normalization.
    pub expected_normalized_reward: f64,
    pub optimal_reward: f64,
}

/// `count` log-spaced modifiers in `[1e-2, 1e2]` together with 0.1, 1 and 10.
pub fn modifier_grid(count: usize) -> Vec<f64> {
    let mut grid = vec![0.1, 1.0, 10.0];
    match count {
        0 => {}
        1 => grid.push(1.0),
        _ => grid.extend((0..count).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / (count - 1) as f64))),
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    grid
}

/// Train once on the config's scenario, then score the trained curves in
/// scenarios whose rate or value mean is scaled by each modifier. Rows are
/// sorted by `(sweep, n, delta)`.
pub fn run_robustness(cfg: &ExperimentConfig) -> Result<Vec<RobustnessRow>> {
    cfg.validate()?;
    let intensity = cfg.intensity()?;
    let dist = cfg.value_distribution()?;
    let solver = cfg.solver();
    let max_n = cfg.max_workers();
    let train = simulate_batch(
        &intensity,
        &dist,
        cfg.horizon,
        derive_seed(cfg.seed, &[streams::TRAIN]),
        cfg.train_realizations,
    )?;
    let trained = fit_curves(&train, cfg.horizon, max_n, |e| e.value, &solver)?;
    let test_seed = derive_seed(cfg.seed, &[streams::TEST]);

    let cells: Vec<(Sweep, f64)> = [Sweep::Rate, Sweep::Mean]
        .into_iter()
        .flat_map(|s| modifier_grid(cfg.modifiers).into_iter().map(move |d| (s, d)))
        .collect();
    let nested: Vec<Vec<RobustnessRow>> = cells
        .into_par_iter()
        .map(|(sweep, delta)| -> Result<Vec<RobustnessRow>> {
            let (test_rate, test_dist) = match sweep {
                Sweep::Rate => (intensity.clone().scaled(delta)?, dist.clone()),
                Sweep::Mean => (intensity.clone(), dist.scaled(delta)?),
            };
            let exact = derive_critical_curves(&test_rate, &test_dist, max_n, cfg.horizon, &solver)?;
            let test = simulate_batch(&test_rate, &test_dist, cfg.horizon, test_seed, cfg.test_realizations)?;
            cfg.workers
                .iter()
                .map(|&n| {
                    let r_star = optimal_reward(&exact.truncated(n)?);
                    let curves = trained.truncated(n)?;
                    let realized = test
                        .iter()
                        .map(|r| replay_policy(&curves, r, |e| e.value).map(|res| res.total_reward / r_star))
                        .collect::<Result<Vec<f64>>>()?;
                    let (mean, se) = mean_se(&realized);
                    let expected = expected_reward(&curves, &test_rate, &test_dist, &solver)? / r_star;
                    Ok(RobustnessRow {
                        sweep,
                        delta,
                        n,
                        mean_normalized_reward: mean,
                        standard_error: se,
                        expected_normalized_reward: expected,
                        optimal_reward: r_star,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<RobustnessRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.sweep, a.n).cmp(&(b.sweep, b.n)).then(a.delta.total_cmp(&b.delta)));
    Ok(rows)
}
