//! Per-round regret records and comparator sequences.

use serde::{Deserialize, Serialize};

use super::BobMeta;
use crate::envs::{DeclaredBudgets, EnvError, LossSequence};
use crate::geometry::Point;
use crate::tuning::BudgetReport;

/// Which comparator the `cum_regret_comp` column is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparatorKind {
    /// The best fixed point among a candidate set (see [`static_comparator`]).
    #[default]
    Static,
    /// The per-round minimizers; then both regret columns coincide.
    Minimizers,
}

impl std::str::FromStr for ComparatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "static" => Ok(ComparatorKind::Static),
            "minimizers" => Ok(ComparatorKind::Minimizers),
            other => Err(format!("unknown comparator '{other}' (static|minimizers)")),
        }
    }
}

/// At most this many segment minimizers are tried as static comparators.
pub const STATIC_CANDIDATES: usize = 64;

/// Best fixed point for the whole sequence among the centroid and up to
/// [`STATIC_CANDIDATES`] evenly spaced segment minimizers.
pub fn static_comparator(env: &LossSequence) -> Point {
    let n = env.segments.len();
    let picks = n.min(STATIC_CANDIDATES);
    let mut candidates = vec![env.domain.centroid()];
    candidates.extend((0..picks).map(|k| env.segments[k * n / picks].minimizer.clone()));
    let total = |u: &Point| env.segments.iter().map(|s| s.len() as f64 * s.family.value(u)).sum::<f64>();
    let mut best = (f64::INFINITY, 0);
    for (i, c) in candidates.iter().enumerate() {
        let v = total(c);
        if v < best.0 {
            best = (v, i);
        }
    }
    candidates.swap_remove(best.1)
}

/// A comparator sequence `u_1, …, u_T`.
pub enum Comparator<'a> {
    Fixed(Point),
    Minimizers(&'a LossSequence),
}

impl<'a> Comparator<'a> {
    pub fn new(kind: ComparatorKind, env: &'a LossSequence) -> Self {
        match kind {
            ComparatorKind::Static => Comparator::Fixed(static_comparator(env)),
            ComparatorKind::Minimizers => Comparator::Minimizers(env),
        }
    }

    pub fn at(&self, t: u64) -> Result<&Point, EnvError> {
        match self {
            Comparator::Fixed(p) => Ok(p),
            Comparator::Minimizers(env) => env.minimizer(t),
        }
    }

    pub fn fixed_point(&self) -> Option<&Point> {
        match self {
            Comparator::Fixed(p) => Some(p),
            Comparator::Minimizers(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub y: f64,
    /// `f_t(z_t)`.
    pub true_loss: f64,
    /// `min_x f_t(x)`.
    pub per_round_min: f64,
    pub comparator_loss: f64,
    pub cum_regret_dyn: f64,
    pub cum_regret_comp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub seed: u64,
    /// Smoothing radius, gradient bound and interval length of plain TEWA.
    pub h: Option<f64>,
    pub grad_bound: Option<f64>,
    pub interval_len: Option<u64>,
    pub declared: DeclaredBudgets,
    pub realized: BudgetReport,
    pub comparator: ComparatorKind,
    pub comparator_point: Option<Point>,
    /// Smallest boundary margin of any query.
    pub min_query_margin: f64,
    /// Smallest margin of any aggregate to the clipped domain.
    pub min_meta_margin: f64,
    /// Largest `−L − 2·ln(2s)` over experts and rounds `s` (local clock).
    pub max_potential_excess: f64,
    /// Whether every minimizer is interior, as the strongly convex analysis assumes.
    pub argmin_interior: bool,
    pub env_scale: f64,
    pub bob: Option<BobMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
    pub meta: TraceMeta,
}

impl RegretTrace {
    pub fn final_regret_dyn(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret_dyn)
    }

    pub fn final_regret_comp(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret_comp)
    }
}

/// Cumulative `Σ (f_t(z_t) − f_t(u_t))` for an arbitrary comparator sequence.
pub fn regret_against(trace: &RegretTrace, comparators: &[Point], env: &LossSequence) -> Result<Vec<f64>, EnvError> {
    if comparators.len() != trace.rows.len() {
        return Err(EnvError::InvalidParameter(format!(
            "{} comparators for {} rounds",
            comparators.len(),
            trace.rows.len()
        )));
    }
    let mut acc = 0.0;
    trace
        .rows
        .iter()
        .zip(comparators)
        .map(|(row, u)| {
            if !env.domain.contains(u, crate::envs::DOMAIN_TOL) {
                return Err(EnvError::OutOfDomain { t: row.t, margin: env.domain.boundary_margin(u) });
            }
            acc += row.true_loss - env.value(row.t, u)?;
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_switching_env, FamilyKind};
    use crate::geometry::DomainSpec;
    use crate::harness::{run_on, RunConfig};
    use crate::random::{stream, StreamId};
    use crate::tuning::minimizer_sequence;
    use rand::Rng;

    fn setup() -> (RunConfig, LossSequence, RegretTrace) {
        let mut c = RunConfig { horizon: 300, d: 2, sigma: 0.05, ..RunConfig::default() };
        c.algo.interval_len = Some(50);
        let mut rng = stream(4, StreamId::Environment);
        let env = make_switching_env(300, 5, FamilyKind::Quadratic, &DomainSpec::unit_ball(2), &mut rng).unwrap();
        let trace = run_on(&c, &env).unwrap().trace;
        (c, env, trace)
    }

    #[test]
    fn minimizer_comparators_reproduce_dynamic_regret() {
        let (_, env, trace) = setup();
        let u: Vec<Point> = minimizer_sequence(&env).cloned().collect();
        let r = regret_against(&trace, &u, &env).unwrap();
        for (a, row) in r.iter().zip(&trace.rows) {
            assert!((a - row.cum_regret_dyn).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_and_switching_comparators_are_dominated() {
        let (_, env, trace) = setup();
        let mut rng = stream(7, StreamId::Auxiliary);
        for _ in 0..50 {
            let switches = rng.random_range(1..6usize);
            let mut cuts: Vec<usize> = (0..switches - 1).map(|_| rng.random_range(1..300)).collect();
            cuts.sort_unstable();
            let mut u = Vec::with_capacity(300);
            let mut point = env.domain.sample_uniform(&mut rng);
            for t in 0..300 {
                if cuts.contains(&t) {
                    point = env.domain.sample_uniform(&mut rng);
                }
                u.push(point.clone());
            }
            let r = regret_against(&trace, &u, &env).unwrap();
            for (a, row) in r.iter().zip(&trace.rows) {
                assert!(row.cum_regret_dyn - a >= -1e-12);
            }
        }
    }

    #[test]
    fn static_comparator_beats_other_candidates() {
        let (_, env, _) = setup();
        let best = static_comparator(&env);
        let total = |u: &Point| (1..=env.horizon).map(|t| env.value(t, u).unwrap()).sum::<f64>();
        let b = total(&best);
        for s in &env.segments {
            assert!(b <= total(&s.minimizer) + 1e-9);
        }
        assert!(b <= total(&env.domain.centroid()) + 1e-9);
    }
}
