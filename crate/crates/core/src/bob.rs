//! Bandit-over-bandit tuning: EXP3 over power-of-two interval lengths,
//! restarting the learner at the start of every epoch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{DomainSpec, Point};
use crate::random::RandomStream;
use crate::tewa::{RoundRecord, Tewa, TewaConfig, TewaError};
use crate::tuning::Curvature;

/// `{2^i : i = 0, …, ⌊log₂T⌋}`.
pub fn bob_grid(horizon: u64) -> Vec<u64> {
    let top = 63 - horizon.max(1).leading_zeros();
    (0..=top).map(|i| 1u64 << i).collect()
}

/// `min(1, √(|𝓑|·ln|𝓑| / ((e − 1)·E)))`.
pub fn bob_gamma(grid_size: usize, epochs: u64) -> f64 {
    let n = grid_size as f64;
    (n * n.ln() / ((std::f64::consts::E - 1.0) * epochs as f64)).sqrt().min(1.0)
}

/// `(1 − γ)·s_i/Σs + γ/|𝓑|`.
pub fn bob_probs(s: &[f64], gamma: f64) -> Vec<f64> {
    let total: f64 = s.iter().sum();
    let floor = gamma / s.len() as f64;
    s.iter().map(|v| (1.0 - gamma) * v / total + floor).collect()
}

/// `½ + Σ(1 − y_t)/(2·L·M_T)`, the reward before importance weighting.
pub fn bob_scaled_reward(epoch_losses: &[f64], epoch_len: u64, m_t: f64) -> f64 {
    0.5 + epoch_losses.iter().map(|y| 1.0 - y).sum::<f64>() / (2.0 * epoch_len as f64 * m_t)
}

/// Importance-weighted reward of the chosen arm.
pub fn bob_reward(epoch_losses: &[f64], epoch_len: u64, m_t: f64, p_chosen: f64) -> f64 {
    bob_scaled_reward(epoch_losses, epoch_len, m_t) / p_chosen
}

/// Weights above this are rescaled; probabilities are ratio-invariant.
const RESCALE_ABOVE: f64 = 1e100;

/// Multiplies the chosen weight by `exp(γ·reward/|𝓑|)`.
pub fn bob_update(s: &[f64], chosen: usize, reward: f64, gamma: f64, grid_size: usize) -> Vec<f64> {
    let mut out = s.to_vec();
    out[chosen] *= (gamma * reward / grid_size as f64).exp();
    let top = out.iter().copied().fold(0.0, f64::max);
    if top > RESCALE_ABOVE {
        for v in out.iter_mut() {
            *v /= top;
        }
    }
    out
}

/// `⌈(dT)^{2/3}⌉` (convex) or `⌈d√T⌉` (strongly convex), capped at `T`.
pub fn bob_epoch_len(d: usize, horizon: u64, curvature: Curvature) -> u64 {
    let (df, t) = (d as f64, horizon as f64);
    let raw = match curvature {
        Curvature::Convex => (df * t).powf(2.0 / 3.0),
        Curvature::StronglyConvex => df * t.sqrt(),
    };
    let r = raw.round();
    let c = if (raw - r).abs() <= 1e-9 * r.max(1.0) { r } else { raw.ceil() };
    (c as u64).clamp(1, horizon)
}

/// `1 + 2σ√log(T+1)`.
pub fn loss_bound(sigma: f64, horizon: u64) -> f64 {
    1.0 + 2.0 * sigma * ((horizon as f64) + 1.0).ln().sqrt()
}

/// EXP3 over a fixed set of arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3 {
    pub s: Vec<f64>,
    pub gamma: f64,
}

impl Exp3 {
    pub fn new(arms: usize, epochs: u64) -> Self {
        assert!(arms >= 1);
        Exp3 { s: vec![1.0; arms], gamma: bob_gamma(arms, epochs) }
    }

    pub fn probs(&self) -> Vec<f64> {
        bob_probs(&self.s, self.gamma)
    }

    /// Draws an arm; returns it with its probability.
    pub fn draw(&self, rng: &mut RandomStream) -> (usize, f64) {
        let p = self.probs();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                return (i, *pi);
            }
        }
        let last = p.len() - 1;
        (last, p[last])
    }

    /// Feeds a reward in `[0, 1]` for `arm`, importance-weighted by `p`.
    pub fn update(&mut self, arm: usize, scaled_reward: f64, p: f64) {
        self.s = bob_update(&self.s, arm, scaled_reward / p, self.gamma, self.s.len());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobConfig {
    pub dim: usize,
    pub horizon: u64,
    pub sigma: f64,
    /// Epoch length `L`; `None` picks [`bob_epoch_len`].
    pub epoch_len: Option<u64>,
    pub curvature: Curvature,
    pub domain: DomainSpec,
}

impl BobConfig {
    pub fn resolved_epoch_len(&self) -> u64 {
        self.epoch_len.unwrap_or_else(|| bob_epoch_len(self.dim, self.horizon, self.curvature)).clamp(1, self.horizon)
    }
}

/// What happened in one finished epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    pub arm: usize,
    pub interval_len: u64,
    pub prob: f64,
    pub rounds: u64,
    /// Reward before clamping and importance weighting.
    pub raw_reward: f64,
    pub clamped_reward: f64,
}

/// The restarted learner driven by EXP3.
#[derive(Debug, Clone)]
pub struct BobTewa {
    config: BobConfig,
    grid: Vec<u64>,
    epoch_len: u64,
    epochs: u64,
    m_t: f64,
    exp3: Exp3,
    epoch: u64,
    arm: usize,
    prob: f64,
    inner: Tewa,
    losses: Vec<f64>,
    history: Vec<EpochRecord>,
    /// Whether some epoch ran with `B` longer than the epoch itself.
    pub b_exceeded_epoch: bool,
}

impl BobTewa {
    /// Starts epoch 1; the arm is drawn from `rng`.
    pub fn new(config: BobConfig, rng: &mut RandomStream) -> Result<Self, TewaError> {
        let grid = bob_grid(config.horizon);
        let epoch_len = config.resolved_epoch_len();
        let epochs = config.horizon.div_ceil(epoch_len);
        let exp3 = Exp3::new(grid.len(), epochs);
        let m_t = loss_bound(config.sigma, config.horizon);
        let (arm, prob) = exp3.draw(rng);
        let inner = Self::fresh(&config, grid[arm])?;
        Ok(BobTewa {
            b_exceeded_epoch: grid[arm] > epoch_len,
            config,
            grid,
            epoch_len,
            epochs,
            m_t,
            exp3,
            epoch: 1,
            arm,
            prob,
            inner,
            losses: Vec::new(),
            history: Vec::new(),
        })
    }

    fn fresh(config: &BobConfig, b: u64) -> Result<Tewa, TewaError> {
        Tewa::new(TewaConfig {
            dim: config.dim,
            horizon: config.horizon,
            interval_len: b,
            sigma: config.sigma,
            domain: config.domain.clone(),
        })
    }

    pub fn grid(&self) -> &[u64] {
        &self.grid
    }

    pub fn epoch_len(&self) -> u64 {
        self.epoch_len
    }

    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    pub fn exp3(&self) -> &Exp3 {
        &self.exp3
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    pub fn current(&self) -> &Tewa {
        &self.inner
    }

    pub fn propose(&mut self, rng: &mut RandomStream) -> Result<Point, TewaError> {
        if self.losses.len() as u64 == self.epoch_len {
            self.close_epoch(rng)?;
        }
        Ok(self.inner.propose(rng)?.clone())
    }

    pub fn update(&mut self, y: f64) -> Result<RoundRecord, TewaError> {
        let rec = self.inner.update(y)?;
        self.losses.push(y);
        Ok(rec)
    }

    /// Settles the running epoch (also usable for a short final one).
    pub fn finish(&mut self) {
        if !self.losses.is_empty() {
            self.settle();
        }
    }

    fn settle(&mut self) {
        let raw = bob_scaled_reward(&self.losses, self.epoch_len, self.m_t);
        let clamped = raw.clamp(0.0, 1.0);
        self.exp3.update(self.arm, clamped, self.prob);
        self.history.push(EpochRecord {
            epoch: self.epoch,
            arm: self.arm,
            interval_len: self.grid[self.arm],
            prob: self.prob,
            rounds: self.losses.len() as u64,
            raw_reward: raw,
            clamped_reward: clamped,
        });
        self.losses.clear();
    }

    fn close_epoch(&mut self, rng: &mut RandomStream) -> Result<(), TewaError> {
        self.settle();
        self.epoch += 1;
        let (arm, prob) = self.exp3.draw(rng);
        self.arm = arm;
        self.prob = prob;
        self.inner = Self::fresh(&self.config, self.grid[arm])?;
        self.b_exceeded_epoch |= self.grid[arm] > self.epoch_len;
        Ok(())
    }
}
