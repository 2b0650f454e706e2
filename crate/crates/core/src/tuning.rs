//! Choosing the interval length `B` from non-stationarity budgets, and
//! measuring the budgets a sequence actually realizes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{LossSequence, TvKind};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuningError {
    #[error("no budget given: provide S, Delta or P")]
    NoBudget,
    #[error("S must lie in [1, {horizon}], got {switches}")]
    InvalidSwitches { switches: u64, horizon: u64 },
    #[error("{name} must be positive and finite, got {value}")]
    InvalidBudget { name: &'static str, value: f64 },
    #[error("P cannot be combined with S or Delta")]
    MixedBudgets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Curvature {
    #[default]
    Convex,
    #[serde(rename = "sc")]
    StronglyConvex,
}

impl Curvature {
    pub fn name(self) -> &'static str {
        match self {
            Curvature::Convex => "convex",
            Curvature::StronglyConvex => "sc",
        }
    }
}

impl std::str::FromStr for Curvature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "convex" => Ok(Curvature::Convex),
            "sc" | "strongly-convex" | "strongly_convex" => Ok(Curvature::StronglyConvex),
            other => Err(format!("unknown curvature '{other}' (convex|sc)")),
        }
    }
}

/// Non-stationarity budgets used for tuning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Budgets {
    #[serde(rename = "S")]
    pub switches: Option<u64>,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    #[serde(rename = "P")]
    pub path: Option<f64>,
    pub curvature: Curvature,
}

/// Ceiling that ignores float noise of relative size 1e−9, so that a
/// power evaluating to `65536.0000001` still rounds to 65536.
fn tolerant_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn clamp_to_horizon(x: f64, horizon: u64) -> u64 {
    let c = tolerant_ceil(x);
    if c >= horizon as f64 {
        horizon
    } else if c <= 1.0 {
        1
    } else {
        c as u64
    }
}

/// `⌈T/S⌉`.
pub fn choose_b_switching(horizon: u64, switches: u64) -> u64 {
    horizon.div_ceil(switches.max(1)).clamp(1, horizon)
}

/// `⌈max(T/S, (√d·T/Δ)^{4/5})⌉` (convex) or `⌈max(T/S, (dT/Δ)^{2/3})⌉`
/// (strongly convex), clamped to `[1, T]`.
pub fn choose_b_dynamic(horizon: u64, switches: u64, delta: f64, d: usize, curvature: Curvature) -> u64 {
    let (t, df) = (horizon as f64, d as f64);
    let by_tv = match curvature {
        Curvature::Convex => (df.sqrt() * t / delta).powf(0.8),
        Curvature::StronglyConvex => (df * t / delta).powf(2.0 / 3.0),
    };
    clamp_to_horizon((t / switches as f64).max(by_tv), horizon)
}

/// `⌈(r√d·T/P)^{4/5}⌉` (convex) or `⌈(r·d·T/P)^{2/3}⌉` (strongly convex),
/// clamped to `[1, T]`.
pub fn choose_b_path(horizon: u64, path: f64, d: usize, r: f64, curvature: Curvature) -> u64 {
    let (t, df) = (horizon as f64, d as f64);
    let raw = match curvature {
        Curvature::Convex => (r * df.sqrt() * t / path).powf(0.8),
        Curvature::StronglyConvex => (r * df * t / path).powf(2.0 / 3.0),
    };
    clamp_to_horizon(raw, horizon)
}

/// Dispatches on which budgets are present. `Δ` without `S` uses `S = T`.
pub fn choose_b(horizon: u64, d: usize, inner_radius: f64, budgets: &Budgets) -> Result<u64, TuningError> {
    if let Some(s) = budgets.switches {
        if s == 0 || s > horizon {
            return Err(TuningError::InvalidSwitches { switches: s, horizon });
        }
    }
    for (name, v) in [("Delta", budgets.delta), ("P", budgets.path)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TuningError::InvalidBudget { name, value: v });
            }
        }
    }
    match (budgets.switches, budgets.delta, budgets.path) {
        (None, None, None) => Err(TuningError::NoBudget),
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => Err(TuningError::MixedBudgets),
        (None, None, Some(p)) => Ok(choose_b_path(horizon, p, d, inner_radius, budgets.curvature)),
        (Some(s), None, None) => Ok(choose_b_switching(horizon, s)),
        (s, Some(delta), None) => Ok(choose_b_dynamic(horizon, s.unwrap_or(horizon), delta, d, budgets.curvature)),
    }
}

/// Budgets realized by a comparator sequence and a loss sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// `1 + #{t : u_t ≠ u_{t−1}}`.
    pub switches: u64,
    /// `Σ ‖u_t − u_{t−1}‖`.
    pub path: f64,
    /// Closed-form total variation or, failing that, an upper bound.
    pub tv: Option<f64>,
    pub tv_kind: Option<TvKind>,
    /// Grid lower estimate, present whenever `tv` is not exact.
    pub tv_estimate_lower: Option<f64>,
}

/// Points on which the variation lower estimate is evaluated.
pub const TV_GRID_POINTS: usize = 1024;

pub fn measure_budgets<'a>(env: &LossSequence, comparators: impl IntoIterator<Item = &'a Point>) -> BudgetReport {
    let mut switches = 0u64;
    let mut path = 0.0;
    let mut prev: Option<&Point> = None;
    for u in comparators {
        match prev {
            None => switches = 1,
            Some(p) if p != u => {
                switches += 1;
                path += p.distance(u);
            }
            Some(_) => {}
        }
        prev = Some(u);
    }
    let closed = env.tv_closed_form();
    let tv_estimate_lower = match closed {
        Some((_, TvKind::ClosedForm)) => None,
        _ => Some(env.tv_estimate_lower(TV_GRID_POINTS)),
    };
    BudgetReport { switches, path, tv: closed.map(|c| c.0), tv_kind: closed.map(|c| c.1), tv_estimate_lower }
}

/// The per-round minimizers `u_t = argmin f_t`.
pub fn minimizer_sequence(env: &LossSequence) -> impl Iterator<Item = &Point> {
    env.segments.iter().flat_map(|s| std::iter::repeat_n(&s.minimizer, s.len() as usize))
}
