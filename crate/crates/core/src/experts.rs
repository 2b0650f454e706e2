//! Sleeping experts: projected online gradient descent on a strongly convex
//! surrogate of the linearized loss.

use serde::{Deserialize, Serialize};

use crate::geometry::{DomainSpec, Point};
use crate::schedule::ExpertKey;

/// What every expert sees in a round: its learning rate, the gradient
/// bound, the meta-action and the gradient estimate.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateContext<'a> {
    pub eta: f64,
    pub grad_bound: f64,
    pub x_meta: &'a Point,
    pub g: &'a Point,
}

impl SurrogateContext<'_> {
    fn curvature(&self) -> f64 {
        self.eta * self.eta * self.grad_bound * self.grad_bound
    }
}

/// `−η⟨g, x_meta − x⟩ + η²G²‖x_meta − x‖²`.
pub fn surrogate_loss(ctx: &SurrogateContext<'_>, x: &Point) -> f64 {
    let diff = ctx.x_meta.sub(x);
    -ctx.eta * ctx.g.dot(&diff) + ctx.curvature() * diff.norm_sq()
}

/// `ηg + 2η²G²(x − x_meta)`.
pub fn surrogate_grad(ctx: &SurrogateContext<'_>, x: &Point) -> Point {
    let two_c = 2.0 * ctx.curvature();
    Point::new(
        ctx.g
            .iter()
            .zip(x.iter().zip(ctx.x_meta.iter()))
            .map(|(gi, (xi, mi))| ctx.eta * gi + two_c * (xi - mi))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertState {
    pub key: ExpertKey,
    /// Current action, always inside the clipped domain.
    pub action: Point,
    /// Cumulative surrogate loss over the rounds seen so far.
    pub cum_loss: f64,
    /// `t − start + 1` for the round about to be played.
    pub age: u64,
}

impl ExpertState {
    pub fn spawn(key: ExpertKey, action: Point) -> Self {
        ExpertState { key, action, cum_loss: 0.0, age: 1 }
    }
}

/// One round of an expert: charge the surrogate loss of the current action,
/// then take a projected gradient step with `μ = 1/(2η²G²·age)`.
pub fn expert_step(state: &ExpertState, ctx: &SurrogateContext<'_>, clipped: &DomainSpec) -> ExpertState {
    debug_assert!(state.age >= 1);
    debug_assert_eq!(ctx.eta, state.key.eta);
    let loss = surrogate_loss(ctx, &state.action);
    let mu = 1.0 / (2.0 * ctx.curvature() * state.age as f64);
    let grad = surrogate_grad(ctx, &state.action);
    let action = clipped.project(&state.action.add_scaled(-mu, &grad));
    ExpertState { key: state.key, action, cum_loss: state.cum_loss + loss, age: state.age + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_sphere;
    use crate::random::{stream, StreamId};
    use crate::schedule::GcInterval;
    use rand::Rng;

    fn key(eta: f64) -> ExpertKey {
        ExpertKey { interval: GcInterval::new(0, 1), rate_index: 0, eta }
    }

    #[test]
    fn loss_examples() {
        let (xm, g) = (Point::zeros(2), Point::new(vec![1.0, 0.0]));
        let ctx = SurrogateContext { eta: 0.1, grad_bound: 1.0, x_meta: &xm, g: &g };
        assert_eq!(surrogate_loss(&ctx, &xm), 0.0);
        assert!((surrogate_loss(&ctx, &Point::new(vec![1.0, 0.0])) - 0.11).abs() < 1e-15);
        assert!((surrogate_loss(&ctx, &Point::new(vec![-1.0, 0.0])) + 0.09).abs() < 1e-15);
    }

    #[test]
    fn grad_examples() {
        let (xm, g) = (Point::zeros(2), Point::new(vec![1.0, 0.0]));
        let ctx = SurrogateContext { eta: 0.1, grad_bound: 1.0, x_meta: &xm, g: &g };
        assert_eq!(surrogate_grad(&ctx, &xm), g.scaled(0.1));
        let gr = surrogate_grad(&ctx, &Point::new(vec![0.5, 0.0]));
        assert!((gr[0] - 0.11).abs() < 1e-15 && gr[1] == 0.0);
    }

    #[test]
    fn grad_matches_central_differences() {
        let mut rng = stream(4, StreamId::Auxiliary);
        for _ in 0..100 {
            let xm = sample_sphere(&mut rng, 3).scaled(rng.random::<f64>());
            let g = sample_sphere(&mut rng, 3).scaled(3.0 * rng.random::<f64>());
            let ctx = SurrogateContext { eta: 0.05 + rng.random::<f64>(), grad_bound: 2.0, x_meta: &xm, g: &g };
            let x = sample_sphere(&mut rng, 3);
            let analytic = surrogate_grad(&ctx, &x);
            let step = 1e-5;
            for i in 0..3 {
                let mut e = Point::zeros(3).into_inner();
                e[i] = step;
                let e = Point::new(e);
                let fd = (surrogate_loss(&ctx, &x.add_scaled(1.0, &e)) - surrogate_loss(&ctx, &x.add_scaled(-1.0, &e)))
                    / (2.0 * step);
                assert!((fd - analytic[i]).abs() <= 1e-6 * analytic[i].abs().max(1.0), "{fd} vs {}", analytic[i]);
            }
        }
    }

    #[test]
    fn surrogate_is_strongly_convex() {
        let mut rng = stream(5, StreamId::Auxiliary);
        for _ in 0..200 {
            let xm = sample_sphere(&mut rng, 2);
            let g = sample_sphere(&mut rng, 2).scaled(4.0);
            let (eta, gb) = (0.01 + 0.1 * rng.random::<f64>(), 4.0);
            let ctx = SurrogateContext { eta, grad_bound: gb, x_meta: &xm, g: &g };
            let x = sample_sphere(&mut rng, 2);
            let v = sample_sphere(&mut rng, 2);
            let s = 0.1;
            let second = surrogate_loss(&ctx, &x.add_scaled(s, &v)) - 2.0 * surrogate_loss(&ctx, &x)
                + surrogate_loss(&ctx, &x.add_scaled(-s, &v));
            assert!(second >= 2.0 * eta * eta * gb * gb * s * s - 1e-9);
        }
    }

    #[test]
    fn step_example_one_dimension() {
        let clipped = DomainSpec::cube(1, 1.0);
        let (xm, g) = (Point::zeros(1), Point::new(vec![1.0]));
        let ctx = SurrogateContext { eta: 0.1, grad_bound: 1.0, x_meta: &xm, g: &g };
        let st = ExpertState::spawn(key(0.1), Point::new(vec![0.5]));
        let next = expert_step(&st, &ctx, &clipped);
        assert_eq!(next.action, Point::new(vec![-1.0]));
        // the loss oracle: −0.1·1·(0 − 0.5) + 0.01·0.25
        let expected = -0.1 * (0.0 - 0.5) + 0.01 * 0.25;
        assert!((next.cum_loss - expected).abs() < 1e-15);
        assert!((next.cum_loss - 0.0525).abs() < 1e-15);
        assert_eq!(next.age, 2);
    }

    #[test]
    fn zero_gradient_at_meta_action_is_a_fixed_point() {
        let clipped = DomainSpec::unit_ball(2);
        let xm = Point::new(vec![0.2, -0.1]);
        let g = Point::zeros(2);
        let ctx = SurrogateContext { eta: 0.07, grad_bound: 3.0, x_meta: &xm, g: &g };
        let mut st = ExpertState::spawn(key(0.07), xm.clone());
        for _ in 0..50 {
            st = expert_step(&st, &ctx, &clipped);
            assert_eq!(st.action, xm);
            assert_eq!(st.cum_loss, 0.0);
        }
        assert_eq!(st.age, 51);
    }
}
