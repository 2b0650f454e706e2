//! The smooth bump `η₀` and its tabulated antiderivative `η`.

use std::sync::OnceLock;

/// Left end of the tabulated range.
pub const TABLE_MIN: f64 = -1.5;
/// Right end of the tabulated range.
pub const TABLE_MAX: f64 = 1.5;
/// Number of grid nodes. Linear interpolation of `η` errs by at most
/// `δ²·max|η₀′|/8`, which stays below 1e−9 at this resolution.
pub const TABLE_NODES: usize = (1 << 16) + 1;

fn phi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `φ(1−|x|) / (φ(1−|x|) + φ(|x|−¼))` with `φ(t) = exp(−1/t)` for `t > 0`.
pub fn bump_eta0(x: f64) -> f64 {
    let u = x.abs();
    if u <= 0.25 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let a = phi(1.0 - u);
    let b = phi(u - 0.25);
    a / (a + b)
}

/// Analytic derivative of [`bump_eta0`].
pub fn bump_eta0_prime(x: f64) -> f64 {
    let u = x.abs();
    if u <= 0.25 || u >= 1.0 {
        return 0.0;
    }
    let a = phi(1.0 - u);
    let b = phi(u - 0.25);
    let s = a + b;
    let du = -a * b * (1.0 / (1.0 - u).powi(2) + 1.0 / (u - 0.25).powi(2)) / (s * s);
    du * x.signum()
}

/// Tabulated antiderivative with the constants derived from it.
#[derive(Debug, Clone)]
pub struct BumpTable {
    step: f64,
    eta0: Vec<f64>,
    eta: Vec<f64>,
    /// `η(1) = ∫η₀`.
    pub eta_of_1: f64,
    /// `max|η″| = max|η₀′|` over the grid and cell midpoints.
    pub lprime: f64,
}

impl BumpTable {
    pub fn build(nodes: usize) -> Self {
        assert!(nodes >= 3);
        let step = (TABLE_MAX - TABLE_MIN) / (nodes - 1) as f64;
        let node = |j: usize| TABLE_MIN + j as f64 * step;
        let eta0: Vec<f64> = (0..nodes).map(|j| bump_eta0(node(j))).collect();
        let mut eta = vec![0.0; nodes];
        let mut lprime = 0.0f64;
        for j in 0..nodes - 1 {
            // Simpson's rule on each cell with an exact midpoint evaluation
            let mid = node(j) + 0.5 * step;
            let cell = step / 6.0 * (eta0[j] + 4.0 * bump_eta0(mid) + eta0[j + 1]);
            eta[j + 1] = eta[j] + cell;
            lprime = lprime.max(bump_eta0_prime(node(j)).abs()).max(bump_eta0_prime(mid).abs());
        }
        let j1 = ((1.0 - TABLE_MIN) / step).round() as usize;
        let eta_of_1 = eta[j1];
        BumpTable { step, eta0, eta, eta_of_1, lprime }
    }

    /// The process-wide table.
    pub fn global() -> &'static BumpTable {
        static TABLE: OnceLock<BumpTable> = OnceLock::new();
        TABLE.get_or_init(|| BumpTable::build(TABLE_NODES))
    }

    pub fn nodes(&self) -> usize {
        self.eta.len()
    }

    /// Tabulated `η₀` at node `j`.
    pub fn eta0_at(&self, j: usize) -> f64 {
        self.eta0[j]
    }

    /// `η(x)`: exact zero below −1, exact `η(1)` above 1, linear
    /// interpolation in between.
    pub fn eta(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.eta_of_1;
        }
        let pos = (x - TABLE_MIN) / self.step;
        let j = (pos.floor() as usize).min(self.eta.len() - 2);
        let frac = pos - j as f64;
        self.eta[j] + frac * (self.eta[j + 1] - self.eta[j])
    }
}
