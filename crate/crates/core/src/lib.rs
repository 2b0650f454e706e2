//! Bandit convex optimization under non-stationarity.
//!
//! One-point bandit feedback, sleeping experts on geometric covering
//! intervals, a bandit-over-bandits wrapper for unknown budgets, and the
//! environments and harness used to measure regret.

pub mod bob;
pub mod envs;
pub mod experts;
pub mod geometry;
pub mod harness;
pub mod random;
pub mod schedule;
pub mod tewa;
pub mod tuning;
