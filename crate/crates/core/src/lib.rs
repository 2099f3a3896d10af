//! Non-parametric sequential assignment.
//!
//! Jobs arrive as a marked Poisson process over `[0, T]` and at most `n` of
//! them may be accepted. From `M` observed realizations this crate estimates
//! the arrival rate and the mean shortage function of job values, integrates
//! the critical-curve ODE system to obtain `n` acceptance thresholds, and
//! replays or scores threshold policies against simulated or ingested
//! streams.

pub mod arrival;
pub mod baselines;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod ode;
pub mod policy;
pub mod rng;
pub mod stats;
pub mod value_dist;

pub use arrival::{simulate, Event, IntensityFunction, Realization};
pub use error::{Error, Result};
pub use estimators::{IntensityEstimate, MeanShortageCache};
pub use ode::{solve_ivp, DenseSolution, SolverConfig, SolverError};
pub use policy::{
    derive_critical_curves, expected_reward, optimal_reward, replay_policy, CriticalCurveSet, ReplayResult,
};
pub use value_dist::{ValueDistribution, ValueModel};
