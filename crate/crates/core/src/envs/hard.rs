//! The bump-perturbed quadratic adversary.
//!
//! Each segment plays `f_ω(x) = α‖x‖² + ιh²Σ ω_i η(x_i/h)` on the unit
//! ball for a sign vector `ω` drawn uniformly from `{−1, 1}^d`. Within
//! `|x_i| ≤ h/4` the bump is linear, so the minimizer is available in closed
//! form whenever `ι ≤ α/2`.

use rand::Rng;

use super::bump::{bump_eta0, BumpTable};
use super::{DeclaredBudgets, EnvError, EnvKind, EnvMeta, LossFamily, LossSequence, Segment};
use crate::geometry::{DomainSpec, Point};
use crate::random::RandomStream;

/// Unscaled `α‖x‖² + ιh²Σ ω_i η(x_i/h)`.
pub fn hard_fn_value(omega: &[i8], h: f64, iota: f64, alpha: f64, x: &Point) -> f64 {
    let table = BumpTable::global();
    let bump: f64 = omega.iter().zip(x.iter()).map(|(&w, &xi)| f64::from(w) * table.eta(xi / h)).sum();
    alpha * x.norm_sq() + iota * h * h * bump
}

/// Gradient of [`hard_fn_value`]: `2αx_i + ιhω_iη₀(x_i/h)`.
pub fn hard_fn_grad(omega: &[i8], h: f64, iota: f64, alpha: f64, x: &Point) -> Point {
    Point::new(
        omega
            .iter()
            .zip(x.iter())
            .map(|(&w, &xi)| 2.0 * alpha * xi + iota * h * f64::from(w) * bump_eta0(xi / h))
            .collect(),
    )
}

/// `x*_i = −hιω_i/(2α)`.
pub fn hard_minimizer(omega: &[i8], h: f64, iota: f64, alpha: f64) -> Result<Point, EnvError> {
    if iota > alpha / 2.0 {
        return Err(EnvError::IotaTooLarge { iota, limit: alpha / 2.0 });
    }
    Ok(Point::new(omega.iter().map(|&w| -h * iota * f64::from(w) / (2.0 * alpha)).collect()))
}

/// The individual constraints on `ι`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IotaConstraints {
    /// `1/(2η(1))`.
    pub bounded: f64,
    /// `α/L′`.
    pub curvature: f64,
    /// `α/2`.
    pub interior: f64,
    /// `√(log 2 / (4 I₀ η(1)²))` with `I₀ = 1/(2σ²)`; absent without noise.
    pub information: Option<f64>,
}

impl IotaConstraints {
    pub fn new(alpha: f64, table: &BumpTable, sigma: f64) -> Self {
        let information = (sigma > 0.0).then(|| {
            let i0 = 1.0 / (2.0 * sigma * sigma);
            (std::f64::consts::LN_2 / (4.0 * i0 * table.eta_of_1 * table.eta_of_1)).sqrt()
        });
        IotaConstraints {
            bounded: 1.0 / (2.0 * table.eta_of_1),
            curvature: alpha / table.lprime,
            interior: alpha / 2.0,
            information,
        }
    }

    pub fn min(&self) -> f64 {
        let base = self.bounded.min(self.curvature).min(self.interior);
        self.information.map_or(base, |v| base.min(v))
    }
}

/// Largest admissible `ι`.
pub fn iota_max(alpha: f64, table: &BumpTable, sigma: f64) -> f64 {
    IotaConstraints::new(alpha, table, sigma).min()
}

/// Divisor keeping `|f_ω| ≤ 1` on the unit ball: `|f_ω| ≤ α + ιh²dη(1)`.
pub fn hard_scale(alpha: f64, iota: f64, h: f64, d: usize) -> f64 {
    (alpha + iota * h * h * d as f64 * BumpTable::global().eta_of_1).max(1.0)
}

/// `(N_c, h)` for the switching/variation adversary. `delta` may be infinite.
pub fn hard_switching_params(horizon: u64, switches: u64, delta: f64, d: usize) -> (u64, f64) {
    let (t, s, df) = (horizon as f64, switches as f64, d as f64);
    let by_tv = (t * delta * delta / (df * df)).cbrt();
    let n_c = (s.min(by_tv).floor() as u64).clamp(1, horizon);
    let h = df.powf(-0.5).min((t / s).powf(-0.25)).min((df * t / delta).powf(-1.0 / 6.0));
    (n_c, h)
}

/// `(N_c, h)` for the path-length adversary.
pub fn hard_path_params(horizon: u64, path: f64, d: usize) -> Result<(u64, f64), EnvError> {
    let (t, df) = (horizon as f64, d as f64);
    let raw = (path.powf(0.8) * t.powf(0.2) * df.powf(-0.4)).floor();
    if raw.is_nan() || raw < 1.0 {
        return Err(EnvError::DegenerateBudget(format!("path budget {path} gives fewer than one segment")));
    }
    let n_c = (raw as u64).min(horizon);
    let h = df.powf(-0.5).min(path / (n_c as f64 * df.sqrt()));
    Ok((n_c, h))
}

fn draw_omega(rng: &mut RandomStream, d: usize) -> Vec<i8> {
    (0..d).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[allow(clippy::too_many_arguments)]
fn build(
    kind: EnvKind,
    horizon: u64,
    d: usize,
    alpha: f64,
    sigma: f64,
    n_c: u64,
    h: f64,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    if d == 0 || horizon == 0 {
        return Err(EnvError::InvalidParameter("d and T must be positive".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(EnvError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let table = BumpTable::global();
    let iota = iota_max(alpha, table, sigma);
    let scale = hard_scale(alpha, iota, h, d);
    let domain = DomainSpec::unit_ball(d);
    let len = horizon.div_ceil(n_c);
    let mut segments = Vec::new();
    let mut tv_bound = 0.0;
    let mut path = 0.0;
    let mut start = 1;
    while start <= horizon {
        let end = (start + len - 1).min(horizon);
        let omega = draw_omega(rng, d);
        let fam = LossFamily::HardBump { omega, h, iota, alpha, scale };
        let seg = Segment::new(start, end, fam, &domain)?;
        if let Some(prev) = segments.last() {
            let prev: &Segment = prev;
            if let (LossFamily::HardBump { omega: w0, .. }, LossFamily::HardBump { omega: w1, .. }) =
                (&prev.family, &seg.family)
            {
                tv_bound += 2.0 * iota * h * h * table.eta_of_1 * hamming(w0, w1) as f64 / scale;
            }
            path += prev.minimizer.distance(&seg.minimizer);
        }
        segments.push(seg);
        start = end + 1;
    }
    let declared = DeclaredBudgets { switches: Some(segments.len() as u64), tv: Some(tv_bound), path: Some(path) };
    Ok(LossSequence {
        kind,
        horizon,
        d,
        domain,
        segments,
        declared,
        meta: EnvMeta { h: Some(h), iota: Some(iota), alpha: Some(alpha), n_c: Some(n_c), scale },
        seed: None,
    })
}

/// The switching/variation adversary with `N_c = min(S, (TΔ²/d²)^{1/3})`
/// segments. Pass `f64::INFINITY` for an unconstrained variation budget.
pub fn make_hard_adversary(
    horizon: u64,
    switches: u64,
    delta: f64,
    d: usize,
    alpha: f64,
    sigma: f64,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    if switches == 0 || switches > horizon {
        return Err(EnvError::InvalidParameter(format!("S must lie in [1, {horizon}], got {switches}")));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(EnvError::InvalidParameter(format!("Delta must be positive, got {delta}")));
    }
    let (n_c, h) = hard_switching_params(horizon, switches, delta, d);
    build(EnvKind::Hard, horizon, d, alpha, sigma, n_c, h, rng)
}

/// The path-length adversary with `N_c = ⌊P^{4/5}T^{1/5}d^{−2/5}⌋`.
pub fn make_hard_path_adversary(
    horizon: u64,
    path: f64,
    d: usize,
    alpha: f64,
    sigma: f64,
    rng: &mut RandomStream,
) -> Result<LossSequence, EnvError> {
    if !(path > 0.0 && path.is_finite()) {
        return Err(EnvError::InvalidParameter(format!("P must be positive and finite, got {path}")));
    }
    let (n_c, h) = hard_path_params(horizon, path, d)?;
    build(EnvKind::HardPath, horizon, d, alpha, sigma, n_c, h, rng)
}
