//! Experiment driver: configuration, the run loop, regret accounting,
//! sweeps and output files.

pub mod config;
pub mod emit;
pub mod sweep;
pub mod trace;

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bob::{BobConfig, BobTewa, EpochRecord};
use crate::envs::{
    self, io as env_io, make_drift_env, make_hard_adversary, make_hard_path_adversary, make_path_env,
    make_switching_env, DeclaredBudgets, EnvError, EnvKind, FamilyKind, LossSequence,
};
use crate::geometry::{DomainSpec, Point};
use crate::random::{stream, RandomStream, StreamId};
use crate::tewa::{RoundRecord, Tewa, TewaConfig, TewaError};
use crate::tuning::{choose_b, measure_budgets, minimizer_sequence, BudgetReport, Budgets, Curvature, TuningError};

pub use config::{apply_overrides, parse_config_text, ConfigError};
pub use sweep::{fit_power_law, sweep, threads_from_env, RateFit, SweepResult};
pub use trace::{regret_against, static_comparator, Comparator, ComparatorKind, RegretTrace, TraceMeta, TraceRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Learner(#[from] TewaError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Tuning(#[from] TuningError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        HarnessError::Config { field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    #[default]
    Tewa,
    BobTewa,
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tewa" => Ok(Algo::Tewa),
            "bob-tewa" => Ok(Algo::BobTewa),
            other => Err(format!("unknown algorithm '{other}' (tewa|bob-tewa)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainShape {
    #[default]
    Ball,
    Cube,
}

impl std::str::FromStr for DomainShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ball" => Ok(DomainShape::Ball),
            "cube" => Ok(DomainShape::Cube),
            other => Err(format!("unknown domain '{other}' (ball|cube)")),
        }
    }
}

/// Environment settings. Budgets left unset fall back to the tuning budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub family: FamilyKind,
    pub domain: DomainShape,
    /// Ball radius or cube half-width.
    pub radius: f64,
    #[serde(rename = "S")]
    pub switches: Option<u64>,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    #[serde(rename = "P")]
    pub path: Option<f64>,
    /// Curvature of the hard instances.
    pub alpha: f64,
    /// Load the sequence from this file instead of generating it.
    pub file: Option<String>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            kind: EnvKind::Switching,
            family: FamilyKind::Quadratic,
            domain: DomainShape::Ball,
            radius: 1.0,
            switches: None,
            delta: None,
            path: None,
            alpha: 0.5,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub kind: Algo,
    /// Explicit interval length; excludes budgets.
    #[serde(rename = "B")]
    pub interval_len: Option<u64>,
    pub budgets: Budgets,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BobSettings {
    /// 0 picks the default epoch length.
    pub epoch_len: u64,
    /// Defaults to the tuning curvature.
    pub curvature: Option<Curvature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: AlgoConfig,
    pub env: EnvConfig,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub d: usize,
    pub sigma: f64,
    pub seed: u64,
    pub bob: BobSettings,
    pub comparator: ComparatorKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algo: AlgoConfig::default(),
            env: EnvConfig::default(),
            horizon: 4096,
            d: 1,
            sigma: 0.0,
            seed: 0,
            bob: BobSettings::default(),
            comparator: ComparatorKind::Static,
        }
    }
}

impl RunConfig {
    pub fn has_budgets(&self) -> bool {
        let b = &self.algo.budgets;
        b.switches.is_some() || b.delta.is_some() || b.path.is_some()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon == 0 {
            return Err(HarnessError::config("T", "must be positive"));
        }
        if self.d == 0 {
            return Err(HarnessError::config("d", "must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(HarnessError::config("sigma", format!("must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.env.radius > 0.0 && self.env.radius.is_finite()) {
            return Err(HarnessError::config("env.radius", "must be positive"));
        }
        if !(self.env.alpha > 0.0 && self.env.alpha.is_finite()) {
            return Err(HarnessError::config("env.alpha", "must be positive"));
        }
        match self.algo.kind {
            Algo::Tewa => match (self.algo.interval_len, self.has_budgets()) {
                (Some(_), true) => {
                    return Err(HarnessError::config("algo.B", "give either B or budgets (S/Delta/P), not both"))
                }
                (None, false) => return Err(HarnessError::config("algo.B", "give either B or budgets (S/Delta/P)")),
                (Some(b), false) if b == 0 || b > self.horizon => {
                    return Err(HarnessError::config("algo.B", format!("must lie in [1, {}], got {b}", self.horizon)))
                }
                _ => {}
            },
            Algo::BobTewa => {
                if self.algo.interval_len.is_some() {
                    return Err(HarnessError::config("algo.B", "bob-tewa chooses B itself"));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> DomainSpec {
        match self.env.domain {
            DomainShape::Ball => DomainSpec::Ball { center: Point::zeros(self.d), radius: self.env.radius },
            DomainShape::Cube => DomainSpec::cube(self.d, self.env.radius),
        }
    }

    /// The interval length plain TEWA will use.
    pub fn resolved_interval_len(&self) -> Result<u64, HarnessError> {
        match self.algo.interval_len {
            Some(b) => Ok(b),
            None => Ok(choose_b(self.horizon, self.d, self.domain().inner_radius(), &self.algo.budgets)?),
        }
    }

    fn env_switches(&self) -> Option<u64> {
        self.env.switches.or(self.algo.budgets.switches)
    }

    fn env_delta(&self) -> Option<f64> {
        self.env.delta.or(self.algo.budgets.delta)
    }

    fn env_path(&self) -> Option<f64> {
        self.env.path.or(self.algo.budgets.path)
    }
}

/// Builds (or loads) the loss sequence of a run from the environment stream.
pub fn build_env(config: &RunConfig) -> Result<LossSequence, HarnessError> {
    if let Some(file) = &config.env.file {
        let env = env_io::import(Path::new(file))?;
        if env.horizon != config.horizon || env.d != config.d {
            return Err(HarnessError::config(
                "env.file",
                format!(
                    "file holds T={}, d={} but the run asks for T={}, d={}",
                    env.horizon, env.d, config.horizon, config.d
                ),
            ));
        }
        return Ok(env);
    }
    let mut rng = stream(config.seed, StreamId::Environment);
    let domain = config.domain();
    let (t, d) = (config.horizon, config.d);
    let family = config.env.family;
    let need = |field: &str| HarnessError::config(field, format!("required by env {}", config.env.kind.name()));
    let mut env = match config.env.kind {
        EnvKind::Switching => {
            make_switching_env(t, config.env_switches().ok_or_else(|| need("env.S"))?, family, &domain, &mut rng)?
        }
        EnvKind::Drift => {
            make_drift_env(t, config.env_delta().ok_or_else(|| need("env.Delta"))?, family, &domain, &mut rng)?
        }
        EnvKind::Path => make_path_env(t, config.env_path().ok_or_else(|| need("env.P"))?, family, &domain, &mut rng)?,
        EnvKind::Hard | EnvKind::HardPath => {
            if domain != DomainSpec::unit_ball(d) {
                return Err(HarnessError::config("env.domain", "hard instances live on the unit ball"));
            }
            if config.env.kind == EnvKind::Hard {
                let s = config.env_switches().ok_or_else(|| need("env.S"))?;
                let delta = config.env_delta().unwrap_or(f64::INFINITY);
                make_hard_adversary(t, s, delta, d, config.env.alpha, config.sigma, &mut rng)?
            } else {
                let p = config.env_path().ok_or_else(|| need("env.P"))?;
                make_hard_path_adversary(t, p, d, config.env.alpha, config.sigma, &mut rng)?
            }
        }
    };
    env.seed = Some(config.seed);
    Ok(env)
}

/// Either learner behind one interface.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AnyLearner {
    Tewa(Tewa),
    Bob(BobTewa),
}

impl AnyLearner {
    pub fn propose(&mut self, rng: &mut RandomStream) -> Result<Point, TewaError> {
        match self {
            AnyLearner::Tewa(l) => Ok(l.propose(rng)?.clone()),
            AnyLearner::Bob(l) => l.propose(rng),
        }
    }

    pub fn update(&mut self, y: f64) -> Result<RoundRecord, TewaError> {
        match self {
            AnyLearner::Tewa(l) => l.update(y),
            AnyLearner::Bob(l) => l.update(y),
        }
    }

    pub fn finish(&mut self) {
        if let AnyLearner::Bob(l) = self {
            l.finish();
        }
    }
}

/// Run-level facts about the restarted learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobMeta {
    pub epoch_len: u64,
    pub epochs: u64,
    pub grid: Vec<u64>,
    pub gamma: f64,
    pub b_exceeded_epoch: bool,
    pub final_probs: Vec<f64>,
    pub history: Vec<EpochRecord>,
}

pub fn build_learner(config: &RunConfig, rng: &mut RandomStream) -> Result<AnyLearner, HarnessError> {
    let domain = config.domain();
    Ok(match config.algo.kind {
        Algo::Tewa => AnyLearner::Tewa(Tewa::new(TewaConfig {
            dim: config.d,
            horizon: config.horizon,
            interval_len: config.resolved_interval_len()?,
            sigma: config.sigma,
            domain,
        })?),
        Algo::BobTewa => AnyLearner::Bob(BobTewa::new(
            BobConfig {
                dim: config.d,
                horizon: config.horizon,
                sigma: config.sigma,
                epoch_len: (config.bob.epoch_len > 0).then_some(config.bob.epoch_len),
                curvature: config.bob.curvature.unwrap_or(config.algo.budgets.curvature),
                domain,
            },
            rng,
        )?),
    })
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub trace: RegretTrace,
    pub wall_time_secs: f64,
}

/// Plays `config.horizon` rounds. Deterministic given the configuration.
pub fn run(config: &RunConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let env = build_env(config)?;
    run_on(config, &env)
}

/// Like [`run`] but against an already built sequence.
pub fn run_on(config: &RunConfig, env: &LossSequence) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let started = Instant::now();
    let mut learner_rng = stream(config.seed, StreamId::Learner);
    let mut noise_rng = stream(config.seed, StreamId::Noise);
    let mut learner = build_learner(config, &mut learner_rng)?;
    let comparator = trace::Comparator::new(config.comparator, env);

    let mut rows = Vec::with_capacity(config.horizon as usize);
    let (mut cum_dyn, mut cum_comp) = (0.0, 0.0);
    let mut min_query_margin = f64::INFINITY;
    let mut min_meta_margin = f64::INFINITY;
    let mut max_potential_excess = f64::NEG_INFINITY;
    for t in 1..=config.horizon {
        let z = learner.propose(&mut learner_rng)?;
        let y = env.observe(t, &z, config.sigma, &mut noise_rng)?;
        let rec = learner.update(y)?;
        let true_loss = env.value(t, &z)?;
        let per_round_min = env.min_value(t)?;
        let comparator_loss = env.value(t, comparator.at(t)?)?;
        cum_dyn += true_loss - per_round_min;
        cum_comp += true_loss - comparator_loss;
        min_query_margin = min_query_margin.min(rec.query_margin);
        min_meta_margin = min_meta_margin.min(rec.meta_margin);
        max_potential_excess = max_potential_excess.max(-rec.min_cum_loss - 2.0 * (2.0 * rec.t as f64).ln());
        rows.push(TraceRow {
            t,
            y,
            true_loss,
            per_round_min,
            comparator_loss,
            cum_regret_dyn: cum_dyn,
            cum_regret_comp: cum_comp,
        });
    }
    learner.finish();

    let (h, grad_bound, interval_len, bob) = match &learner {
        AnyLearner::Tewa(l) => (Some(l.smoothing()), Some(l.grad_bound()), Some(l.config().interval_len), None),
        AnyLearner::Bob(l) => (
            None,
            None,
            None,
            Some(BobMeta {
                epoch_len: l.epoch_len(),
                epochs: l.epochs(),
                grid: l.grid().to_vec(),
                gamma: l.exp3().gamma,
                b_exceeded_epoch: l.b_exceeded_epoch,
                final_probs: l.exp3().probs(),
                history: l.history().to_vec(),
            }),
        ),
    };
    let meta = TraceMeta {
        seed: config.seed,
        h,
        grad_bound,
        interval_len,
        declared: env.declared.clone(),
        realized: realized_budgets(env),
        comparator: config.comparator,
        comparator_point: comparator.fixed_point().cloned(),
        min_query_margin,
        min_meta_margin,
        max_potential_excess,
        argmin_interior: env.argmin_interior(),
        env_scale: env.meta.scale,
        bob,
    };
    Ok(RunOutput {
        config: config.clone(),
        trace: RegretTrace { rows, meta },
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Budgets realized by the per-round minimizers.
pub fn realized_budgets(env: &LossSequence) -> BudgetReport {
    measure_budgets(env, minimizer_sequence(env))
}

/// Declared budgets of the environment a configuration would build.
pub fn declared_budgets(config: &RunConfig) -> Result<DeclaredBudgets, HarnessError> {
    Ok(build_env(config)?.declared)
}

pub use envs::TvKind;
