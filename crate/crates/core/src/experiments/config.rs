use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arrival::IntensityFunction;
use crate::error::{Error, Result};
use crate::ode::SolverConfig;
use crate::value_dist::ValueDistribution;

/// Settings shared by the experiment commands.
///
/// Read from a TOML key-value file; any key may be overridden with
/// `key=value` strings (values use TOML syntax, bare words are strings).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `exponential` or `lomax`.
    pub distribution: String,
    /// Exponential mean.
    pub mean: f64,
    pub lomax_shape: f64,
    pub lomax_scale: f64,
    /// Homogeneous arrival rate.
    pub rate: f64,
    pub horizon: f64,
    /// Worker counts `n` to evaluate.
    pub workers: Vec<usize>,
    /// Training realizations `M`; for the convergence sweep, the largest `M`.
    pub train_realizations: usize,
    /// Explicit `M` values for the convergence sweep; empty means `1..=M`.
    pub m_sweep: Vec<usize>,
    /// Test realizations `M'`.
    pub test_realizations: usize,
    /// Log-spaced modifiers in `[1e-2, 1e2]` for the robustness sweep.
    pub modifiers: usize,
    pub positive_threshold: f64,
    /// Synthetic scored streams: probability that an event is fraudulent.
    pub fraud_rate: f64,
    /// Synthetic scored streams: constant added to every drawn value.
    pub value_floor: f64,
    /// Synthetic scored streams: score equals label.
    pub perfect_scores: bool,
    pub seed: u64,
    pub rtol: f64,
    pub atol: f64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Exponential values, `mu = 5`, `lambda = 1`, `T = 2 pi`, `M` up to 100, `M' = 50`.
    pub fn convergence() -> Self {
        Self {
            distribution: "exponential".into(),
            mean: 5.0,
            lomax_shape: 3.5,
            lomax_scale: 5.0,
            rate: 1.0,
            horizon: 2.0 * std::f64::consts::PI,
            workers: vec![1, 5],
            train_realizations: 100,
            m_sweep: Vec::new(),
            test_realizations: 50,
            modifiers: 20,
            positive_threshold: crate::baselines::DEFAULT_POSITIVE_THRESHOLD,
            fraud_rate: 0.1,
            value_floor: 1.0,
            perfect_scores: false,
            seed: 0,
            rtol: 1e-6,
            atol: 1e-8,
            output: None,
        }
    }

    /// `lambda = 500`, `mu = 200`, `T = 2 pi`, `M = 30`, `M' = 20`, 20 modifiers.
    pub fn robustness() -> Self {
        Self {
            mean: 200.0,
            rate: 500.0,
            workers: vec![1, 5, 20],
            train_realizations: 30,
            test_realizations: 20,
            ..Self::convergence()
        }
    }

    /// Desk-scale synthetic fraud streams.
    pub fn fraud() -> Self {
        Self {
            distribution: "lomax".into(),
            lomax_shape: 2.5,
            lomax_scale: 50.0,
            rate: 200.0,
            horizon: 1.0,
            workers: vec![1, 2, 5, 10, 25],
            train_realizations: 20,
            test_realizations: 20,
            ..Self::convergence()
        }
    }

    /// Start from `base`, apply a config file if given, then `key=value`
    /// overrides, and validate.
    pub fn load(base: Self, file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match toml::Value::try_from(&base) {
            Ok(toml::Value::Table(t)) => t,
            _ => return Err(Error::Config("cannot serialize defaults".into())),
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let file_table: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            table.extend(file_table);
        }
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let key = key.trim();
            let raw = raw.trim();
            let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            table.insert(key.to_string(), value);
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.train_realizations == 0 || self.test_realizations == 0 {
            return fail("train_realizations and test_realizations must be at least 1".into());
        }
        if self.workers.is_empty() || self.workers.contains(&0) {
            return fail("workers must be a nonempty list of counts >= 1".into());
        }
        if self.m_sweep.contains(&0) {
            return fail("m_sweep entries must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return fail("rtol and atol must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.positive_threshold) {
            return fail("positive_threshold must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.fraud_rate) {
            return fail("fraud_rate must lie in [0, 1]".into());
        }
        if !(self.value_floor >= 0.0 && self.value_floor.is_finite()) {
            return fail("value_floor must be nonnegative".into());
        }
        self.value_distribution()?;
        self.intensity()?;
        Ok(())
    }

    pub fn value_distribution(&self) -> Result<ValueDistribution> {
        match self.distribution.as_str() {
            "exponential" => ValueDistribution::exponential(self.mean),
            "lomax" => ValueDistribution::lomax(self.lomax_shape, self.lomax_scale),
            other => Err(Error::Config(format!("unknown distribution {other:?}"))),
        }
    }

    pub fn intensity(&self) -> Result<IntensityFunction> {
        IntensityFunction::constant(self.rate)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig::with_tolerances(self.rtol, self.atol)
    }

    pub fn max_workers(&self) -> usize {
        self.workers.iter().copied().max().unwrap_or(1)
    }

    /// The `M` values of the convergence sweep, ascending.
    pub fn sweep(&self) -> Vec<usize> {
        let mut ms = if self.m_sweep.is_empty() {
            (1..=self.train_realizations).collect()
        } else {
            self.m_sweep.clone()
        };
        ms.sort_unstable();
        ms.dedup();
        ms
    }
}
