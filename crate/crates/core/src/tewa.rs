//! Tilted exponentially weighted aggregation of sleeping experts with a
//! one-point gradient estimate.
//!
//! Each round the learner aggregates the actions of the alive experts with
//! weights `∝ η·exp(−L)`, queries a point on the sphere of radius `h` around
//! the aggregate, turns the single noisy value into a gradient estimate and
//! broadcasts `(x_t, g_t)` so every expert can take one projected gradient
//! step on its own surrogate loss. Experts live on geometric covering
//! intervals; the registry never holds more than `O(log² t)` of them.
//!
//! The learner is exposed both as a closure-driven [`Tewa::round`] and as a
//! split [`Tewa::propose`] / [`Tewa::update`] pair for callers that obtain
//! the feedback asynchronously.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experts::{expert_step, ExpertState, SurrogateContext};
use crate::geometry::{sample_sphere, DomainSpec, GeometryError, Point};
use crate::random::RandomStream;
use crate::schedule::{rate_grid, spawned_at, ExpertKey};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TewaError {
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("a query is already pending; call update first")]
    QueryPending,
    #[error("no pending query; call propose first")]
    NoPendingQuery,
    #[error("horizon of {0} rounds exhausted")]
    HorizonExhausted(u64),
    #[error("feedback must be finite, got {0}")]
    NonFiniteFeedback(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TewaConfig {
    pub dim: usize,
    /// Horizon `T`; enters the gradient bound through `√log(T+1)`.
    pub horizon: u64,
    /// Interval-length parameter `B ∈ [1, T]`.
    pub interval_len: u64,
    /// Noise scale `σ ≥ 0`.
    pub sigma: f64,
    pub domain: DomainSpec,
}

impl TewaConfig {
    pub fn validate(&self) -> Result<(), TewaError> {
        self.domain.validate()?;
        if self.dim == 0 || self.dim != self.domain.dim() {
            return Err(TewaError::InvalidConfig(format!(
                "dim {} does not match the domain dimension {}",
                self.dim,
                self.domain.dim()
            )));
        }
        if self.horizon == 0 {
            return Err(TewaError::InvalidConfig("horizon must be positive".into()));
        }
        if self.interval_len == 0 || self.interval_len > self.horizon {
            return Err(TewaError::InvalidConfig(format!(
                "interval_len must lie in [1, {}], got {}",
                self.horizon, self.interval_len
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(TewaError::InvalidConfig(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// `min(√d·B^{−1/4}, r)`.
pub fn smoothing_radius(dim: usize, interval_len: u64, inner_radius: f64) -> f64 {
    ((dim as f64).sqrt() * (interval_len as f64).powf(-0.25)).min(inner_radius)
}

/// The radius actually used: [`smoothing_radius`], pulled to `0.999·r` when
/// it saturates at `r` so the clipped domain keeps a nonempty interior.
pub fn effective_smoothing_radius(dim: usize, interval_len: u64, inner_radius: f64) -> f64 {
    let h = smoothing_radius(dim, interval_len, inner_radius);
    if h >= inner_radius {
        0.999 * inner_radius
    } else {
        h
    }
}

/// `(d/h)·(1 + 2σ√log(T+1))`.
pub fn grad_bound(dim: usize, h: f64, sigma: f64, horizon: u64) -> f64 {
    (dim as f64 / h) * (1.0 + 2.0 * sigma * ((horizon as f64) + 1.0).ln().sqrt())
}

/// `(d/h)·y·ζ`.
pub fn estimate_gradient(dim: usize, h: f64, y: f64, zeta: &Point) -> Point {
    zeta.scaled(dim as f64 / h * y)
}

/// Weighted average of expert actions with weights `∝ η·exp(−L)`, evaluated
/// in log space with a max shift.
pub fn aggregate<'a, I>(experts: I) -> Point
where
    I: IntoIterator<Item = (f64, f64, &'a Point)>,
{
    let items: Vec<(f64, &Point)> = experts.into_iter().map(|(eta, loss, x)| (eta.ln() - loss, x)).collect();
    assert!(!items.is_empty(), "aggregate needs at least one expert");
    let shift = items.iter().map(|(lw, _)| *lw).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = vec![0.0; items[0].1.dim()];
    let mut total = 0.0;
    for (lw, x) in &items {
        let w = (lw - shift).exp();
        total += w;
        for (a, xi) in acc.iter_mut().zip(x.iter()) {
            *a += w * xi;
        }
    }
    Point::new(acc.into_iter().map(|a| a / total).collect())
}

/// Everything observable about one played round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Round index on the learner's own clock (starts at 1).
    pub t: u64,
    pub x_meta: Point,
    pub z: Point,
    pub y: f64,
    pub g: Point,
    /// Experts alive during the round.
    pub alive: usize,
    /// Smallest cumulative surrogate loss among those experts after the round.
    pub min_cum_loss: f64,
    /// Margin of `z` to the boundary of the feasible set.
    pub query_margin: f64,
    /// Margin of `x_meta` to the boundary of the clipped domain.
    pub meta_margin: f64,
}

#[derive(Debug, Clone)]
struct Pending {
    zeta: Point,
    z: Point,
}

/// Learner state for one run (or one restart epoch).
#[derive(Debug, Clone)]
pub struct Tewa {
    config: TewaConfig,
    h: f64,
    grad_bound: f64,
    diameter: f64,
    clipped: DomainSpec,
    registry: Vec<ExpertState>,
    t: u64,
    x_meta: Point,
    last_zeta: Option<Point>,
    pending: Option<Pending>,
}

impl Tewa {
    pub fn new(config: TewaConfig) -> Result<Self, TewaError> {
        config.validate()?;
        let r = config.domain.inner_radius();
        let h = effective_smoothing_radius(config.dim, config.interval_len, r);
        let clipped = config.domain.shrink(h)?;
        let grad_bound = grad_bound(config.dim, h, config.sigma, config.horizon);
        let diameter = config.domain.diameter();
        let x_meta = clipped.centroid();
        Ok(Tewa {
            config,
            h,
            grad_bound,
            diameter,
            clipped,
            registry: Vec::new(),
            t: 1,
            x_meta,
            last_zeta: None,
            pending: None,
        })
    }

    pub fn config(&self) -> &TewaConfig {
        &self.config
    }

    pub fn smoothing(&self) -> f64 {
        self.h
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    pub fn clipped_domain(&self) -> &DomainSpec {
        &self.clipped
    }

    /// Index of the next round to be played.
    pub fn round_index(&self) -> u64 {
        self.t
    }

    /// Most recent meta-action (the clipped centroid before round 1).
    pub fn meta_action(&self) -> &Point {
        &self.x_meta
    }

    pub fn last_direction(&self) -> Option<&Point> {
        self.last_zeta.as_ref()
    }

    pub fn experts(&self) -> &[ExpertState] {
        &self.registry
    }

    /// Starts round `t`: spawns the experts whose interval begins now,
    /// aggregates, and returns the point to query.
    pub fn propose(&mut self, rng: &mut RandomStream) -> Result<&Point, TewaError> {
        if self.pending.is_some() {
            return Err(TewaError::QueryPending);
        }
        if self.t > self.config.horizon {
            return Err(TewaError::HorizonExhausted(self.config.horizon));
        }
        let init = self.clipped.project(&self.x_meta);
        for interval in spawned_at(self.t) {
            for (i, eta) in rate_grid(interval.len(), self.grad_bound, self.diameter).into_iter().enumerate() {
                let key = ExpertKey { interval, rate_index: i as u32, eta };
                self.registry.push(ExpertState::spawn(key, init.clone()));
            }
        }
        self.x_meta = aggregate(self.registry.iter().map(|e| (e.key.eta, e.cum_loss, &e.action)));
        let zeta = sample_sphere(rng, self.config.dim);
        let z = self.x_meta.add_scaled(self.h, &zeta);
        let pending = self.pending.insert(Pending { zeta, z });
        Ok(&pending.z)
    }

    /// Finishes the round with the observed value `y`.
    pub fn update(&mut self, y: f64) -> Result<RoundRecord, TewaError> {
        if !y.is_finite() {
            return Err(TewaError::NonFiniteFeedback(y));
        }
        let Pending { zeta, z } = self.pending.take().ok_or(TewaError::NoPendingQuery)?;
        let g = estimate_gradient(self.config.dim, self.h, y, &zeta);
        let mut min_cum_loss = f64::INFINITY;
        for expert in self.registry.iter_mut() {
            let ctx =
                SurrogateContext { eta: expert.key.eta, grad_bound: self.grad_bound, x_meta: &self.x_meta, g: &g };
            *expert = expert_step(expert, &ctx, &self.clipped);
            min_cum_loss = min_cum_loss.min(expert.cum_loss);
        }
        let alive = self.registry.len();
        let t = self.t;
        self.registry.retain(|e| e.key.interval.end != t);
        let record = RoundRecord {
            t,
            query_margin: self.config.domain.boundary_margin(&z),
            meta_margin: self.clipped.boundary_margin(&self.x_meta),
            x_meta: self.x_meta.clone(),
            z,
            y,
            g,
            alive,
            min_cum_loss,
        };
        self.last_zeta = Some(zeta);
        self.t += 1;
        Ok(record)
    }

    /// Plays one full round against `feedback`.
    pub fn round<E, F>(&mut self, rng: &mut RandomStream, feedback: F) -> Result<RoundRecord, E>
    where
        F: FnOnce(&Point) -> Result<f64, E>,
        E: From<TewaError>,
    {
        let z = self.propose(rng)?.clone();
        match feedback(&z) {
            Ok(y) => Ok(self.update(y)?),
            Err(e) => {
                self.pending = None;
                Err(e)
            }
        }
    }
}
