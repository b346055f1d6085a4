//! Benchmark objectives: synthetic test functions, a delayed random
//! objective for timing studies, and a surrogate CNN objective over the
//! built-in CNN space paired with an evaluation-cost model.
//!
//! All objectives are deterministic given their inputs (the random one owns
//! its stream); simulated evaluation seconds let the harness report time
//! metrics without sleeping.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

use crate::space::{
    cnn_search_space, continuous_space, validate, Configuration, SearchSpace, ValidationError,
};

/// Outcome of one objective evaluation. `value` is a loss (lower is
/// better); `simulated_eval_seconds` comes from a cost model and drives the
/// virtual clock, while `wall_eval_seconds` is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub simulated_eval_seconds: f64,
    pub wall_eval_seconds: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ObjectiveError {
    #[error(transparent)]
    InvalidConfig(#[from] ValidationError),

    #[error("objective evaluation failed: {0}")]
    Failed(String),
}

/// A black-box objective over configurations of some search space.
pub trait Objective {
    fn evaluate(&mut self, config: &Configuration) -> Result<EvalResult, ObjectiveError>;
}

/// Adapter for plain closures; no simulated cost.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&Configuration) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, config: &Configuration) -> Result<EvalResult, ObjectiveError> {
        let start = Instant::now();
        let value = (self.0)(config);
        Ok(EvalResult {
            value,
            simulated_eval_seconds: 0.0,
            wall_eval_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// `sum(x_i^2)`.
pub fn sphere(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum()
}

/// Sphere function over `d` continuous parameters on `[-5, 5]`.
pub struct SphereObjective {
    space: SearchSpace,
}

impl SphereObjective {
    pub fn new(d: usize) -> Self {
        SphereObjective { space: sphere_space(d) }
    }
}

pub fn sphere_space(d: usize) -> SearchSpace {
    continuous_space(d, -5.0, 5.0)
}

impl Objective for SphereObjective {
    fn evaluate(&mut self, config: &Configuration) -> Result<EvalResult, ObjectiveError> {
        let start = Instant::now();
        validate(config, &self.space)?;
        let xs: Vec<f64> = self
            .space
            .params()
            .iter()
            .map(|p| config.get(p.name()).and_then(|v| v.as_f64()).unwrap())
            .collect();
        Ok(EvalResult {
            value: sphere(&xs),
            simulated_eval_seconds: 0.0,
            wall_eval_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Returns a uniform random loss after a fixed wall-clock delay,
/// independent of the configuration.
pub struct DelayedRandomObjective {
    delay: Duration,
    rng: StdRng,
}

impl DelayedRandomObjective {
    pub fn new(delay_seconds: f64, seed: u64) -> Self {
        DelayedRandomObjective {
            delay: Duration::from_secs_f64(delay_seconds),
            rng: StdRng::seed_from_u64(seed),
        }
    }
}

/// Search space for the delayed objective: `d` parameters on `[0, 1e6]`.
pub fn delayed_random_space(d: usize) -> SearchSpace {
    continuous_space(d, 0.0, 1e6)
}

impl Objective for DelayedRandomObjective {
    fn evaluate(&mut self, _config: &Configuration) -> Result<EvalResult, ObjectiveError> {
        let start = Instant::now();
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let value: f64 = self.rng.random();
        Ok(EvalResult {
            value,
            simulated_eval_seconds: 0.0,
            wall_eval_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Loss-surface constants of the surrogate CNN objective.
#[derive(Debug, Clone, Deserialize)]
pub struct LossCoefficients {
    pub base: f64,
    pub lr_weight: f64,
    pub lr_center_log10: f64,
    pub dropout_weight: f64,
    pub dropout_center: f64,
    pub epoch_weight: f64,
    pub epoch_center: f64,
    pub epoch_scale: f64,
    pub conv_weight: f64,
    pub conv_scale: f64,
    pub fc_weight: f64,
    pub fc_center: f64,
    pub fc_scale: f64,
    pub stride_penalty: f64,
    pub offsets: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Evaluation-cost model: `base_seconds * g(epoch) * h(num_conv_layers) *
/// k(batch_size)` with `g`, `h` increasing and `k` decreasing.
#[derive(Debug, Clone, Deserialize)]
pub struct CostModel {
    pub base_seconds: f64,
    pub epoch_divisor: f64,
    pub conv_base: f64,
    pub conv_slope: f64,
    pub batch_reference: f64,
}

impl CostModel {
    pub fn cost_seconds(&self, epoch: i64, num_conv_layers: i64, batch_size: f64) -> f64 {
        self.base_seconds
            * (epoch as f64 / self.epoch_divisor)
            * (self.conv_base + self.conv_slope * num_conv_layers as f64)
            * (self.batch_reference / batch_size).sqrt()
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct MinimizerRecord {
    pub loss: f64,
    pub num_conv_layers: i64,
    pub lr: f64,
    pub dropout_rate: f64,
    pub optimizer: String,
    pub epoch: i64,
    pub stride: i64,
    pub padding: String,
    pub kernel: String,
    pub num_fc_units: i64,
    pub batch_size: String,
}

impl MinimizerRecord {
    pub fn to_config(&self) -> Configuration {
        use crate::space::ParamValue::{Cat, Float, Int};
        let mut c = Configuration::new();
        c.set("num_conv_layers", Int(self.num_conv_layers));
        c.set("lr", Float(self.lr));
        c.set("dropout_rate", Float(self.dropout_rate));
        c.set("optimizer", Cat(self.optimizer.clone()));
        c.set("epoch", Int(self.epoch));
        c.set("stride", Int(self.stride));
        c.set("padding", Cat(self.padding.clone()));
        c.set("kernel", Cat(self.kernel.clone()));
        c.set("num_fc_units", Int(self.num_fc_units));
        c.set("batch_size", Cat(self.batch_size.clone()));
        c
    }
}

/// Full canonical definition: loss surface, cost model and the recorded
/// global minimizer.
#[derive(Debug, Clone, Deserialize)]
pub struct SurrogateDefinition {
    pub loss: LossCoefficients,
    pub cost: CostModel,
    pub minimizer: MinimizerRecord,
}

/// The canonical definition file, embedded verbatim.
pub const SURROGATE_CNN_TOML: &str = include_str!("../data/surrogate_cnn.toml");

impl SurrogateDefinition {
    pub fn canonical() -> Self {
        toml::from_str(SURROGATE_CNN_TOML).expect("embedded surrogate definition parses")
    }
}

/// Deterministic analytic stand-in for CNN training over the built-in CNN
/// space: separable unimodal loss terms per numeric parameter plus fixed
/// offsets per categorical choice, with a multiplicative cost model.
pub struct SurrogateCnn {
    definition: SurrogateDefinition,
    space: SearchSpace,
}

impl Default for SurrogateCnn {
    fn default() -> Self {
        Self::new(SurrogateDefinition::canonical())
    }
}

impl SurrogateCnn {
    pub fn new(definition: SurrogateDefinition) -> Self {
        SurrogateCnn { definition, space: cnn_search_space() }
    }

    pub fn definition(&self) -> &SurrogateDefinition {
        &self.definition
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn float(config: &Configuration, name: &str) -> f64 {
        config.get(name).and_then(|v| v.as_f64()).unwrap()
    }

    fn int(config: &Configuration, name: &str) -> i64 {
        match config.get(name) {
            Some(crate::space::ParamValue::Int(v)) => *v,
            other => panic!("expected integer for {name}, got {other:?}"),
        }
    }

    fn cat<'c>(config: &'c Configuration, name: &str) -> &'c str {
        config.get(name).and_then(|v| v.as_str()).unwrap()
    }

    fn offset(&self, param: &str, choice: &str) -> f64 {
        self.definition.loss.offsets[param][choice]
    }

    /// The loss surface alone, without validation or timing.
    pub fn loss(&self, config: &Configuration) -> f64 {
        let c = &self.definition.loss;
        let lr = Self::float(config, "lr");
        let dropout = Self::float(config, "dropout_rate");
        let epoch = Self::int(config, "epoch");
        let conv = Self::int(config, "num_conv_layers");
        let fc = Self::int(config, "num_fc_units");
        let stride = Self::int(config, "stride");

        let mut v = c.base;
        v += c.lr_weight * (lr.log10() - c.lr_center_log10).powi(2);
        v += c.dropout_weight * (dropout - c.dropout_center).powi(2);
        v += c.epoch_weight * ((epoch as f64 - c.epoch_center) / c.epoch_scale).powi(2);
        v += c.conv_weight * (-(conv as f64 - 2.0) / c.conv_scale).exp();
        v += c.fc_weight * ((fc as f64 - c.fc_center) / c.fc_scale).powi(2);
        v += c.stride_penalty * (stride as f64 - 1.0);
        v += self.offset("optimizer", Self::cat(config, "optimizer"));
        v += self.offset("padding", Self::cat(config, "padding"));
        v += self.offset("kernel", Self::cat(config, "kernel"));
        v += self.offset("batch_size", Self::cat(config, "batch_size"));
        v
    }

    /// Simulated training seconds for a configuration.
    pub fn cost_seconds(&self, config: &Configuration) -> f64 {
        let batch: f64 = Self::cat(config, "batch_size").parse().unwrap();
        self.definition.cost.cost_seconds(
            Self::int(config, "epoch"),
            Self::int(config, "num_conv_layers"),
            batch,
        )
    }
}

impl Objective for SurrogateCnn {
    fn evaluate(&mut self, config: &Configuration) -> Result<EvalResult, ObjectiveError> {
        let start = Instant::now();
        validate(config, &self.space)?;
        Ok(EvalResult {
            value: self.loss(config),
            simulated_eval_seconds: self.cost_seconds(config),
            wall_eval_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Total simulated seconds accumulated over a list of evaluations.
pub fn simulate_clock(results: &[EvalResult]) -> f64 {
    results.iter().map(|r| r.simulated_eval_seconds).sum()
}
