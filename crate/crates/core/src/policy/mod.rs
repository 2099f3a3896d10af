//! Optimal acceptance thresholds: derivation, replay, and expected reward.

mod curves;
mod replay;
mod reward;

pub use curves::{derive_critical_curves, CriticalCurveSet, Curve};
pub use replay::{replay_policy, Acceptance, ReplayResult};
pub use reward::{expected_reward, optimal_reward};
