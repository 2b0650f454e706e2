//! Non-stationary loss sequences.
//!
//! A [`LossSequence`] is a run-length encoded list of segments, each holding
//! one loss function together with its analytic minimizer. Sequences are
//! immutable after construction and can be shared across threads.

pub mod bump;
pub mod hard;
pub mod io;
pub mod synthetic;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{DomainSpec, GeometryError, Point};
use crate::random::RandomStream;

pub use bump::{bump_eta0, BumpTable};
pub use hard::{hard_fn_value, hard_minimizer, iota_max, make_hard_adversary, make_hard_path_adversary};
pub use synthetic::{make_drift_env, make_path_env, make_switching_env};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("query at round {t} lies outside the domain (margin {margin:.3e})")]
    OutOfDomain { t: u64, margin: f64 },
    #[error("round {t} outside [1, {horizon}]")]
    RoundOutOfRange { t: u64, horizon: u64 },
    #[error("invalid environment parameter: {0}")]
    InvalidParameter(String),
    #[error("iota {iota} exceeds alpha/2 = {limit}")]
    IotaTooLarge { iota: f64, limit: f64 },
    #[error("degenerate budget: {0}")]
    DegenerateBudget(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed environment file: {0}")]
    Parse(String),
}

/// Tolerance used when checking that queries are feasible.
pub const DOMAIN_TOL: f64 = 1e-9;

/// One loss function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LossFamily {
    /// `(α/2)‖x − c‖² + offset`.
    Quadratic { alpha: f64, center: Point, offset: f64 },
    /// `Σ a_i |x_i − c_i|`, Lipschitz with constant `‖a‖`.
    CappedAbs { a: Point, center: Point },
    /// `(α‖x‖² + ιh²Σ ω_i η(x_i/h)) / scale`.
    HardBump { omega: Vec<i8>, h: f64, iota: f64, alpha: f64, scale: f64 },
}

impl LossFamily {
    pub fn dim(&self) -> usize {
        match self {
            LossFamily::Quadratic { center, .. } | LossFamily::CappedAbs { center, .. } => center.dim(),
            LossFamily::HardBump { omega, .. } => omega.len(),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            LossFamily::Quadratic { alpha, center, offset } => 0.5 * alpha * x.distance_sq(center) + offset,
            LossFamily::CappedAbs { a, center } => {
                a.iter().zip(x.iter().zip(center.iter())).map(|(ai, (xi, ci))| ai * (xi - ci).abs()).sum()
            }
            LossFamily::HardBump { omega, h, iota, alpha, scale } => hard_fn_value(omega, *h, *iota, *alpha, x) / scale,
        }
    }

    /// The minimizer over `domain`, in closed form.
    pub fn minimizer(&self, domain: &DomainSpec) -> Result<Point, EnvError> {
        match self {
            LossFamily::Quadratic { center, .. } => Ok(domain.project(center)),
            LossFamily::CappedAbs { a, center } => {
                if !domain.contains(center, 0.0) || a.iter().any(|&ai| ai <= 0.0) {
                    return Err(EnvError::InvalidParameter(
                        "absolute-value losses need an interior center and positive weights".into(),
                    ));
                }
                Ok(center.clone())
            }
            LossFamily::HardBump { omega, h, iota, alpha, .. } => {
                let x = hard_minimizer(omega, *h, *iota, *alpha)?;
                if !domain.contains(&x, 0.0) {
                    return Err(EnvError::InvalidParameter("bump minimizer falls outside the domain".into()));
                }
                Ok(x)
            }
        }
    }
}

/// How a total-variation figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvKind {
    /// The exact supremum.
    ClosedForm,
    /// A provable upper bound on the supremum.
    UpperBound,
}

/// `max_{x ∈ domain} |f(x) − g(x)|` when a closed form or bound exists.
pub fn tv_between(f: &LossFamily, g: &LossFamily, domain: &DomainSpec) -> Option<(f64, TvKind)> {
    match (f, g) {
        (
            LossFamily::Quadratic { alpha: a1, center: c1, offset: o1 },
            LossFamily::Quadratic { alpha: a2, center: c2, offset: o2 },
        ) if a1 == a2 => {
            // the difference is affine: −α⟨x, c1 − c2⟩ + (α/2)(‖c1‖² − ‖c2‖²) + o1 − o2
            let b = c1.sub(c2).scaled(-a1);
            let a0 = 0.5 * a1 * (c1.norm_sq() - c2.norm_sq()) + o1 - o2;
            Some((domain.sup_abs_affine(a0, &b), TvKind::ClosedForm))
        }
        (LossFamily::CappedAbs { a: a1, center: c1 }, LossFamily::CappedAbs { a: a2, center: c2 }) if a1 == a2 => {
            let bound = a1.iter().zip(c1.iter().zip(c2.iter())).map(|(ai, (x, y))| ai * (x - y).abs()).sum();
            Some((bound, TvKind::UpperBound))
        }
        (
            LossFamily::HardBump { omega: w1, h, iota, alpha, scale },
            LossFamily::HardBump { omega: w2, h: h2, iota: i2, alpha: al2, scale: s2 },
        ) if h == h2 && iota == i2 && alpha == al2 && scale == s2 => {
            // coordinates where the signs differ contribute 2ω_iη(x_i/h) ∈ ±[0, 2η(1)];
            // the corner x_i = ±h realizes the larger signed group
            if !domain.contains(&Point::splat(w1.len(), *h), 0.0) {
                return None;
            }
            let plus = w1.iter().zip(w2).filter(|(a, b)| a != b && **a > 0).count();
            let minus = w1.iter().zip(w2).filter(|(a, b)| a != b && **a < 0).count();
            let eta1 = BumpTable::global().eta_of_1;
            Some((2.0 * iota * h * h * eta1 * plus.max(minus) as f64 / scale, TvKind::ClosedForm))
        }
        _ => None,
    }
}

/// Which generator produced a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Switching,
    Drift,
    Path,
    Hard,
    HardPath,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Switching => "switching",
            EnvKind::Drift => "drift",
            EnvKind::Path => "path",
            EnvKind::Hard => "hard",
            EnvKind::HardPath => "hard-path",
        }
    }
}

impl std::str::FromStr for EnvKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "switching" => Ok(EnvKind::Switching),
            "drift" => Ok(EnvKind::Drift),
            "path" => Ok(EnvKind::Path),
            "hard" => Ok(EnvKind::Hard),
            "hard-path" => Ok(EnvKind::HardPath),
            other => Err(format!("unknown environment '{other}' (switching|drift|path|hard|hard-path)")),
        }
    }
}

/// Loss shape used by the synthetic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Quadratic,
    CappedAbs,
}

impl std::str::FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quadratic" => Ok(FamilyKind::Quadratic),
            "capped-abs" => Ok(FamilyKind::CappedAbs),
            other => Err(format!("unknown loss family '{other}' (quadratic|capped-abs)")),
        }
    }
}

/// Budgets the generator promises for its minimizer sequence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeclaredBudgets {
    pub switches: Option<u64>,
    pub tv: Option<f64>,
    pub path: Option<f64>,
}

/// Construction constants worth reporting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvMeta {
    /// Bump width of hard instances.
    pub h: Option<f64>,
    pub iota: Option<f64>,
    pub alpha: Option<f64>,
    /// Number of hard-instance segments requested.
    pub n_c: Option<u64>,
    /// Positive constant the raw losses were divided by.
    pub scale: f64,
}

/// A maximal run of rounds sharing one loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: u64,
    pub end: u64,
    pub family: LossFamily,
    pub minimizer: Point,
    pub min_value: f64,
}

impl Segment {
    pub fn new(start: u64, end: u64, family: LossFamily, domain: &DomainSpec) -> Result<Self, EnvError> {
        let minimizer = family.minimizer(domain)?;
        let min_value = family.value(&minimizer);
        Ok(Segment { start, end, family, minimizer, min_value })
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSequence {
    pub kind: EnvKind,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub d: usize,
    pub domain: DomainSpec,
    pub segments: Vec<Segment>,
    pub declared: DeclaredBudgets,
    pub meta: EnvMeta,
    pub seed: Option<u64>,
}

impl LossSequence {
    /// Checks that segments tile `[1, T]`, dimensions agree and the stored
    /// minimizers match the closed forms.
    pub fn validate(&self) -> Result<(), EnvError> {
        self.domain.validate()?;
        if self.domain.dim() != self.d {
            return Err(EnvError::InvalidParameter("domain dimension differs from d".into()));
        }
        let mut next = 1;
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.start != next || seg.end < seg.start {
                return Err(EnvError::InvalidParameter(format!("segment {k} does not continue the tiling at {next}")));
            }
            if seg.family.dim() != self.d {
                return Err(EnvError::InvalidParameter(format!("segment {k} has the wrong dimension")));
            }
            let x = seg.family.minimizer(&self.domain)?;
            if x != seg.minimizer || seg.family.value(&x).to_bits() != seg.min_value.to_bits() {
                return Err(EnvError::InvalidParameter(format!("segment {k} minimizer does not match its loss")));
            }
            next = seg.end + 1;
        }
        if next != self.horizon + 1 {
            return Err(EnvError::InvalidParameter(format!(
                "segments cover [1, {}] instead of [1, {}]",
                next - 1,
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn segment_index(&self, t: u64) -> Result<usize, EnvError> {
        if t == 0 || t > self.horizon {
            return Err(EnvError::RoundOutOfRange { t, horizon: self.horizon });
        }
        Ok(self.segments.partition_point(|s| s.end < t))
    }

    pub fn segment_at(&self, t: u64) -> Result<&Segment, EnvError> {
        Ok(&self.segments[self.segment_index(t)?])
    }

    pub fn value(&self, t: u64, x: &Point) -> Result<f64, EnvError> {
        Ok(self.segment_at(t)?.family.value(x))
    }

    pub fn minimizer(&self, t: u64) -> Result<&Point, EnvError> {
        Ok(&self.segment_at(t)?.minimizer)
    }

    pub fn min_value(&self, t: u64) -> Result<f64, EnvError> {
        Ok(self.segment_at(t)?.min_value)
    }

    /// `f_t(z) + σ·ξ` with standard normal `ξ` from `rng`.
    pub fn observe(&self, t: u64, z: &Point, sigma: f64, rng: &mut RandomStream) -> Result<f64, EnvError> {
        let margin = self.domain.boundary_margin(z);
        if z.dim() != self.d || margin < -DOMAIN_TOL {
            return Err(EnvError::OutOfDomain { t, margin });
        }
        let f = self.value(t, z)?;
        if sigma == 0.0 {
            return Ok(f);
        }
        let xi: f64 = rng.sample(StandardNormal);
        Ok(f + sigma * xi)
    }

    /// Total variation from closed forms; `None` if some transition has none.
    /// The kind is `UpperBound` as soon as one transition is only bounded.
    pub fn tv_closed_form(&self) -> Option<(f64, TvKind)> {
        let mut total = 0.0;
        let mut kind = TvKind::ClosedForm;
        for w in self.segments.windows(2) {
            let (v, k) = tv_between(&w[0].family, &w[1].family, &self.domain)?;
            total += v;
            if k == TvKind::UpperBound {
                kind = TvKind::UpperBound;
            }
        }
        Some((total, kind))
    }

    /// Lower estimate of the total variation: per transition, the largest
    /// difference over a fixed `n`-point sample of the domain.
    pub fn tv_estimate_lower(&self, n: usize) -> f64 {
        let grid = self.domain.sample_grid(n);
        self.segments
            .windows(2)
            .map(|w| grid.iter().map(|x| (w[0].family.value(x) - w[1].family.value(x)).abs()).fold(0.0, f64::max))
            .sum()
    }

    /// Largest `|f_t(x)|` over an `n`-point sample, across all segments.
    pub fn max_abs_on_grid(&self, n: usize) -> f64 {
        let grid = self.domain.sample_grid(n);
        self.segments
            .iter()
            .map(|s| grid.iter().map(|x| s.family.value(x).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Whether every minimizer is an unconstrained stationary point, i.e.
    /// lies strictly inside the domain.
    pub fn argmin_interior(&self) -> bool {
        self.segments.iter().all(|s| self.domain.boundary_margin(&s.minimizer) > 0.0)
    }
}
