//! Feasible sets, exact Euclidean projections and uniform sampling.
//!
//! Only Euclidean balls and axis-aligned boxes are supported. Both have
//! closed-form projections and closed-form erosions, which is all the
//! learners need: the clipped domain used for perturbed queries is the
//! erosion of the feasible set by the smoothing radius.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Deref, Index};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::random::RandomStream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("shrink radius {h} must be below the inner radius {inner_radius}")]
    ShrinkTooLarge { h: f64, inner_radius: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A point of `R^d`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// `value` repeated in every coordinate.
    pub fn splat(d: usize, value: f64) -> Self {
        Point(vec![value; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    /// `self - other`.
    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| s * a).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A convex compact feasible set with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Ball { center: Point, radius: f64 },
    Box { lower: Point, upper: Point },
}

impl DomainSpec {
    pub fn ball(center: Point, radius: f64) -> Result<Self, GeometryError> {
        let dom = DomainSpec::Ball { center, radius };
        dom.validate()?;
        Ok(dom)
    }

    pub fn unit_ball(d: usize) -> Self {
        DomainSpec::Ball { center: Point::zeros(d), radius: 1.0 }
    }

    pub fn new_box(lower: Point, upper: Point) -> Result<Self, GeometryError> {
        let dom = DomainSpec::Box { lower, upper };
        dom.validate()?;
        Ok(dom)
    }

    /// The cube `[-half_width, half_width]^d`.
    pub fn cube(d: usize, half_width: f64) -> Self {
        DomainSpec::Box { lower: Point::splat(d, -half_width), upper: Point::splat(d, half_width) }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            DomainSpec::Ball { center, radius } => {
                if center.dim() == 0 {
                    return Err(GeometryError::InvalidDomain("dimension must be positive".into()));
                }
                if !center.is_finite() {
                    return Err(GeometryError::InvalidDomain("ball center must be finite".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(GeometryError::InvalidDomain(format!(
                        "ball radius must be positive and finite, got {radius}"
                    )));
                }
            }
            DomainSpec::Box { lower, upper } => {
                if lower.dim() == 0 {
                    return Err(GeometryError::InvalidDomain("dimension must be positive".into()));
                }
                if lower.dim() != upper.dim() {
                    return Err(GeometryError::DimensionMismatch { expected: lower.dim(), got: upper.dim() });
                }
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(GeometryError::InvalidDomain("box bounds must be finite".into()));
                }
                if let Some(i) = (0..lower.dim()).find(|&i| upper[i].partial_cmp(&lower[i]) != Some(Ordering::Greater))
                {
                    return Err(GeometryError::InvalidDomain(format!(
                        "box coordinate {i} has upper {} <= lower {}",
                        upper[i], lower[i]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { center, .. } => center.dim(),
            DomainSpec::Box { lower, .. } => lower.dim(),
        }
    }

    /// Radius of the largest ball contained in the set.
    pub fn inner_radius(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => *radius,
            DomainSpec::Box { lower, upper } => {
                lower.iter().zip(upper.iter()).map(|(l, u)| 0.5 * (u - l)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
            DomainSpec::Box { lower, upper } => upper.distance(lower),
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            DomainSpec::Ball { center, .. } => center.clone(),
            DomainSpec::Box { lower, upper } => {
                Point(lower.iter().zip(upper.iter()).map(|(l, u)| 0.5 * (l + u)).collect())
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &Point) -> Point {
        debug_assert_eq!(x.dim(), self.dim());
        match self {
            DomainSpec::Ball { center, radius } => {
                let offset = x.sub(center);
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.add_scaled(radius / dist, &offset)
                }
            }
            DomainSpec::Box { lower, upper } => {
                Point(x.iter().zip(lower.iter().zip(upper.iter())).map(|(v, (l, u))| v.clamp(*l, *u)).collect())
            }
        }
    }

    /// Signed margin to the boundary: nonnegative exactly on the set, equal
    /// to the distance to the boundary inside it. Outside a box the value is
    /// the most violated coordinate margin.
    pub fn boundary_margin(&self, x: &Point) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => radius - x.distance(center),
            DomainSpec::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(v, (l, u))| (v - l).min(u - v))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dim() && self.boundary_margin(x) >= -tol
    }

    /// The erosion `{u : u + h B^d ⊂ self}`.
    pub fn shrink(&self, h: f64) -> Result<DomainSpec, GeometryError> {
        let inner = self.inner_radius();
        if !h.is_finite() || h < 0.0 || h >= inner {
            return Err(GeometryError::ShrinkTooLarge { h, inner_radius: inner });
        }
        Ok(match self {
            DomainSpec::Ball { center, radius } => DomainSpec::Ball { center: center.clone(), radius: radius - h },
            DomainSpec::Box { lower, upper } => DomainSpec::Box {
                lower: Point(lower.iter().map(|l| l + h).collect()),
                upper: Point(upper.iter().map(|u| u - h).collect()),
            },
        })
    }

    /// Homothety about the centroid by `factor` in `(0, 1]`.
    pub fn scaled_about_center(&self, factor: f64) -> DomainSpec {
        match self {
            DomainSpec::Ball { center, radius } => DomainSpec::Ball { center: center.clone(), radius: radius * factor },
            DomainSpec::Box { lower, upper } => {
                let lo = lower.iter().zip(upper.iter()).map(|(l, u)| 0.5 * (l + u) - 0.5 * factor * (u - l)).collect();
                let hi = lower.iter().zip(upper.iter()).map(|(l, u)| 0.5 * (l + u) + 0.5 * factor * (u - l)).collect();
                DomainSpec::Box { lower: Point(lo), upper: Point(hi) }
            }
        }
    }

    /// `max_{x in self} ||x - c||^2`, in closed form.
    pub fn max_sq_distance_from(&self, c: &Point) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => {
                let r = radius + c.distance(center);
                r * r
            }
            DomainSpec::Box { lower, upper } => c
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(ci, (l, u))| {
                    let m = (ci - l).abs().max((u - ci).abs());
                    m * m
                })
                .sum(),
        }
    }

    /// `max_{x in self} |a0 + <b, x>|`, in closed form.
    pub fn sup_abs_affine(&self, a0: f64, b: &Point) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => (a0 + b.dot(center)).abs() + radius * b.norm(),
            DomainSpec::Box { lower, upper } => {
                let mid: f64 =
                    b.iter().zip(lower.iter().zip(upper.iter())).map(|(bi, (l, u))| bi * 0.5 * (l + u)).sum();
                let spread: f64 =
                    b.iter().zip(lower.iter().zip(upper.iter())).map(|(bi, (l, u))| bi.abs() * 0.5 * (u - l)).sum();
                (a0 + mid).abs() + spread
            }
        }
    }

    /// A uniform draw from the set.
    pub fn sample_uniform(&self, rng: &mut RandomStream) -> Point {
        match self {
            DomainSpec::Ball { center, radius } => center.add_scaled(*radius, &sample_ball(rng, self.dim())),
            DomainSpec::Box { lower, upper } => {
                Point(lower.iter().zip(upper.iter()).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect())
            }
        }
    }

    /// A fixed, seed-independent set of `n` points of the domain used for
    /// grid audits. In one dimension the grid is evenly spaced including
    /// both endpoints; otherwise it holds the centroid, the axis extremes and
    /// a fixed pseudo-random fill.
    pub fn sample_grid(&self, n: usize) -> Vec<Point> {
        let d = self.dim();
        if n == 0 {
            return Vec::new();
        }
        if d == 1 {
            let (lo, hi) = match self {
                DomainSpec::Ball { center, radius } => (center[0] - radius, center[0] + radius),
                DomainSpec::Box { lower, upper } => (lower[0], upper[0]),
            };
            if n == 1 {
                return vec![Point(vec![0.5 * (lo + hi)])];
            }
            return (0..n).map(|i| Point(vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])).collect();
        }
        let mut pts = vec![self.centroid()];
        let c = self.centroid();
        for i in 0..d {
            for sign in [-1.0, 1.0] {
                let mut e = Point::zeros(d);
                e.0[i] = sign * 1e6;
                pts.push(self.project(&c.add_scaled(1.0, &e)));
            }
        }
        if let DomainSpec::Box { lower, upper } = self {
            if d <= 8 {
                for mask in 0..(1usize << d) {
                    pts.push(Point((0..d).map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] }).collect()));
                }
            }
        }
        let mut rng = crate::random::stream(0x0b5e_55ed, crate::random::StreamId::Auxiliary);
        while pts.len() < n {
            pts.push(self.sample_uniform(&mut rng));
        }
        pts.truncate(n);
        pts
    }
}

/// Uniform draw from the unit sphere `∂B^d` (Gaussian-normalize).
pub fn sample_sphere(rng: &mut RandomStream, d: usize) -> Point {
    assert!(d >= 1, "sphere dimension must be positive");
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return Point(g.into_iter().map(|a| a / norm).collect());
        }
    }
}

/// Uniform draw from the unit ball `B^d`.
pub fn sample_ball(rng: &mut RandomStream, d: usize) -> Point {
    let dir = sample_sphere(rng, d);
    let u: f64 = rng.random();
    dir.scaled(u.powf(1.0 / d as f64))
}
