//! Switching, drifting and path-bounded environments built from shifted
//! quadratics or weighted absolute-value losses.
//!
//! Centers always live in the half-size copy `0.5·Θ` of the domain, so for
//! any center `c` and any `x ∈ Θ` the distance `‖x − c‖` is at most
//! `M = 0.75·diam(Θ)`. Both families are normalized against `M` once per
//! domain, which keeps every loss in `[0, 1]` without per-sequence fitting.

use rand::seq::index::sample;

use super::{tv_between, DeclaredBudgets, EnvError, EnvKind, EnvMeta, FamilyKind, LossFamily, LossSequence, Segment};
use crate::geometry::{sample_sphere, DomainSpec, Point};
use crate::random::RandomStream;

/// `max_{x ∈ Θ, c ∈ 0.5Θ} ‖x − c‖`.
pub fn center_reach(domain: &DomainSpec) -> f64 {
    0.75 * domain.diameter()
}

/// Curvature making `(α/2)‖x − c‖² ≤ 1`.
pub fn quadratic_alpha(domain: &DomainSpec) -> f64 {
    let m = center_reach(domain);
    2.0 / (m * m)
}

/// Per-coordinate weight making `Σ a_i|x_i − c_i| ≤ 1`.
pub fn abs_weight(domain: &DomainSpec) -> f64 {
    1.0 / (center_reach(domain) * (domain.dim() as f64).sqrt())
}

/// Bound on `max_x |f_c(x) − f_{c′}(x)| / ‖c − c′‖` for either family.
pub fn tv_per_unit_shift(kind: FamilyKind, domain: &DomainSpec) -> f64 {
    let m = center_reach(domain);
    match kind {
        // α⟨c′ − c, x − (c + c′)/2⟩ with ‖x − midpoint‖ ≤ M
        FamilyKind::Quadratic => quadratic_alpha(domain) * m,
        FamilyKind::CappedAbs => 1.0 / m,
    }
}

pub fn family_at(kind: FamilyKind, center: Point, domain: &DomainSpec) -> LossFamily {
    match kind {
        FamilyKind::Quadratic => LossFamily::Quadratic { alpha: quadratic_alpha(domain), center, offset: 0.0 },
        FamilyKind::CappedAbs => LossFamily::CappedAbs { a: Point::splat(domain.dim(), abs_weight(domain)), center },
    }
}

struct Builder<'a> {
    domain: &'a DomainSpec,
    segments: Vec<Segment>,
}

impl<'a> Builder<'a> {
    fn new(domain: &'a DomainSpec) -> Self {
        Builder { domain, segments: Vec::new() }
    }

    /// Appends rounds `[start, end]`, merging with an identical predecessor.
    fn push(&mut self, start: u64, end: u64, family: LossFamily) -> Result<(), EnvError> {
        if let Some(last) = self.segments.last_mut() {
            if last.family == family {
                last.end = end;
                return Ok(());
            }
        }
        self.segments.push(Segment::new(start, end, family, self.domain)?);
        Ok(())
    }

    fn finish(self, kind: EnvKind, horizon: u64, declared_switches: Option<u64>) -> LossSequence {
        let domain = self.domain.clone();
        let path = self.segments.windows(2).map(|w| w[0].minimizer.distance(&w[1].minimizer)).sum();
        let mut env = LossSequence {
            kind,
            horizon,
            d: domain.dim(),
            domain,
            segments: self.segments,
            declared: DeclaredBudgets::default(),
            meta: EnvMeta { scale: 1.0, ..Default::default() },
            seed: None,
        };
        let tv = env.tv_closed_form().map(|(v, _)| v);
        env.declared = DeclaredBudgets {
            switches: Some(declared_switches.unwrap_or(env.segments.len() as u64)),
            tv,
            path: Some(path),
        };
        env
    }
}

fn check_horizon(horizon: u64, domain: &DomainSpec) -> Result<(), EnvError> {
    domain.validate()?;
    if horizon == 0 {
        return Err(EnvError::InvalidParameter("T must be positive".into()));
    }
    Ok(())
}

/// `S` segments split at uniformly random change points, each with a fresh
/// uniform center in `0.5·Θ`.
pub fn make_switching_env(
    horizon: u64,
    switches: u64,
    kind: FamilyKind,
    domain: &DomainSpec,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    check_horizon(horizon, domain)?;
    if switches == 0 || switches > horizon {
        return Err(EnvError::InvalidParameter(format!("S must lie in [1, {horizon}], got {switches}")));
    }
    let mut cuts: Vec<u64> =
        sample(rng, (horizon - 1) as usize, (switches - 1) as usize).into_iter().map(|i| i as u64 + 2).collect();
    cuts.sort_unstable();
    let inner = domain.scaled_about_center(0.5);
    let mut b = Builder::new(domain);
    let mut start = 1;
    for end in cuts.iter().map(|c| c - 1).chain(std::iter::once(horizon)) {
        b.push(start, end, family_at(kind, inner.sample_uniform(rng), domain))?;
        start = end + 1;
    }
    Ok(b.finish(EnvKind::Switching, horizon, None))
}

/// Centers follow a random walk projected onto `0.5·Θ`, with a per-round
/// step sized so that the variation bound of every step sums to `Δ`.
pub fn make_drift_env(
    horizon: u64,
    delta: f64,
    kind: FamilyKind,
    domain: &DomainSpec,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    check_horizon(horizon, domain)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(EnvError::InvalidParameter(format!("Delta must be finite and >= 0, got {delta}")));
    }
    let inner = domain.scaled_about_center(0.5);
    let step = if horizon > 1 { delta / ((horizon - 1) as f64 * tv_per_unit_shift(kind, domain)) } else { 0.0 };
    let mut center = inner.sample_uniform(rng);
    let mut b = Builder::new(domain);
    b.push(1, 1, family_at(kind, center.clone(), domain))?;
    for t in 2..=horizon {
        if step > 0.0 {
            let u = sample_sphere(rng, domain.dim());
            center = inner.project(&center.add_scaled(step, &u));
        }
        b.push(t, t, family_at(kind, center.clone(), domain))?;
    }
    Ok(b.finish(EnvKind::Drift, horizon, None))
}

/// A walk of `T − 1` steps of length exactly `P/(T − 1)` inside `0.5·Θ`.
/// A step that would leave the region is reversed, and if that fails too it
/// heads straight for the centroid.
pub fn make_path_env(
    horizon: u64,
    path: f64,
    kind: FamilyKind,
    domain: &DomainSpec,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    check_horizon(horizon, domain)?;
    if !(path >= 0.0 && path.is_finite()) {
        return Err(EnvError::InvalidParameter(format!("P must be finite and >= 0, got {path}")));
    }
    if horizon == 1 && path > 0.0 {
        return Err(EnvError::DegenerateBudget("a single round cannot move".into()));
    }
    let inner = domain.scaled_about_center(0.5);
    let step = if horizon > 1 { path / (horizon - 1) as f64 } else { 0.0 };
    if step > 0.5 * inner.inner_radius() {
        return Err(EnvError::DegenerateBudget(format!(
            "per-round step {step} exceeds half the inner radius {} of the walk region",
            inner.inner_radius()
        )));
    }
    let mid = inner.centroid();
    let mut center = inner.sample_uniform(rng);
    let mut b = Builder::new(domain);
    b.push(1, 1, family_at(kind, center.clone(), domain))?;
    for t in 2..=horizon {
        if step > 0.0 {
            let u = sample_sphere(rng, domain.dim());
            let fwd = center.add_scaled(step, &u);
            let back = center.add_scaled(-step, &u);
            center = if inner.contains(&fwd, 0.0) {
                fwd
            } else if inner.contains(&back, 0.0) {
                back
            } else {
                // both fail only far from the centroid, so the full step fits
                let to_mid = mid.sub(&center);
                center.add_scaled(step / to_mid.norm(), &to_mid)
            };
        }
        b.push(t, t, family_at(kind, center.clone(), domain))?;
    }
    Ok(b.finish(EnvKind::Path, horizon, None))
}

/// Closed-form or bounded variation of one transition; exposed for audits.
pub fn transition_tv(env: &LossSequence, k: usize) -> Option<f64> {
    tv_between(&env.segments[k - 1].family, &env.segments[k].family, &env.domain).map(|(v, _)| v)
}
