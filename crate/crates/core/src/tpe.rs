//! The TPE optimization loop: initial prior sampling, quantile split into
//! good/bad observation sets, per-parameter density fitting, acquisition
//! scoring and candidate proposal.
//!
//! A single run is strictly sequential; independent runs can proceed
//! concurrently as long as each owns its random stream and history.

use std::fmt;
use std::time::Instant;

use rand::Rng;

use crate::density::{
    fit_categorical, AdaptiveKde, DensityPair, Estimator, Transform, UniformDensity,
};
use crate::objectives::{Objective, ObjectiveError};
use crate::space::{Configuration, DomainSpec, SearchSpace};

/// Which part of a run produced an observation: plain full-space TPE or a
/// numbered group phase of the sequential strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Simultaneous,
    Group(usize),
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Simultaneous => f.write_str("simultaneous"),
            Phase::Group(k) => write!(f, "group{k}"),
        }
    }
}

/// One evaluated configuration with its timing breakdown.
#[derive(Debug, Clone)]
pub struct Observation {
    pub config: Configuration,
    /// Objective value; lower is better.
    pub value: f64,
    /// Wall seconds spent inside the objective.
    pub eval_seconds: f64,
    /// Cost-model seconds reported by the objective (0 without a cost model).
    pub simulated_eval_seconds: f64,
    /// Wall seconds spent on split + fit + propose; 0 for prior samples.
    pub tpe_seconds: f64,
    pub iteration: usize,
    pub phase: Phase,
}

/// Knobs of the TPE loop.
#[derive(Debug, Clone)]
pub struct TpeSettings {
    /// Iterations drawn from the prior before the model kicks in.
    pub n_init: usize,
    /// Quantile fraction defining the good set.
    pub gamma: f64,
    /// Candidates scored per proposal.
    pub n_candidates: usize,
    pub max_iter: usize,
}

impl TpeSettings {
    pub fn new(max_iter: usize) -> Self {
        TpeSettings { n_init: 15, gamma: 0.25, n_candidates: 24, max_iter }
    }

    pub fn validate(&self) -> Result<(), TpeError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(TpeError::InvalidSettings(format!("gamma {} not in (0, 1)", self.gamma)));
        }
        if self.n_init < 2 {
            return Err(TpeError::InvalidSettings(format!("n_init {} < 2", self.n_init)));
        }
        if self.n_candidates < 1 {
            return Err(TpeError::InvalidSettings("n_candidates must be >= 1".into()));
        }
        if self.max_iter < self.n_init {
            return Err(TpeError::InvalidSettings(format!(
                "max_iter {} < n_init {}",
                self.max_iter, self.n_init
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TpeError {
    #[error("cannot split an empty history")]
    EmptyHistory,

    #[error("acquisition needs positive densities (l = {l}, g = {g})")]
    NonPositiveDensity { l: f64, g: f64 },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

/// A run aborted mid-way; the partial history is attached.
#[derive(Debug, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Settings(TpeError),

    #[error("objective failed at iteration {iteration}: {source}")]
    Objective {
        iteration: usize,
        source: ObjectiveError,
        history: Vec<Observation>,
    },
}

/// History partitioned at the `gamma` quantile.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub good: Vec<Observation>,
    pub bad: Vec<Observation>,
    /// Value of the k-th best observation (y*).
    pub threshold: f64,
}

/// Sorts ascending by value (stable on insertion order) and takes the best
/// `max(1, ceil(gamma * n))` observations as the good set; elements tied
/// with the threshold beyond that count stay bad.
pub fn split_by_quantile(history: &[Observation], gamma: f64) -> Result<SplitResult, TpeError> {
    if history.is_empty() {
        return Err(TpeError::EmptyHistory);
    }
    let mut order: Vec<usize> = (0..history.len()).collect();
    order.sort_by(|a, b| history[*a].value.total_cmp(&history[*b].value));
    let k = ((gamma * history.len() as f64).ceil() as usize).max(1);
    let good: Vec<Observation> = order[..k].iter().map(|i| history[*i].clone()).collect();
    let bad: Vec<Observation> = order[k..].iter().map(|i| history[*i].clone()).collect();
    let threshold = good.last().expect("k >= 1").value;
    Ok(SplitResult { good, bad, threshold })
}

/// Fitted good/bad densities for every parameter, kept in canonical space
/// order so joint scores accumulate deterministically.
#[derive(Debug, Clone)]
pub struct DensityModel {
    pairs: Vec<(String, DensityPair)>,
}

impl DensityModel {
    pub fn pairs(&self) -> &[(String, DensityPair)] {
        &self.pairs
    }

    pub fn pair(&self, name: &str) -> Option<&DensityPair> {
        self.pairs.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    /// `sum_j (ln l(h_j) - ln g(h_j))` over the canonical parameter order.
    pub fn log_joint_ratio(&self, config: &Configuration) -> f64 {
        self.pairs
            .iter()
            .map(|(name, pair)| {
                let v = config.get(name).expect("configuration covers the model");
                pair.good.log_density(v) - pair.bad.log_density(v)
            })
            .sum()
    }
}

/// Model densities use the adaptive Parzen estimator (neighbor-gap
/// bandwidths plus a uniform prior component) rather than a single
/// Scott-rule bandwidth: a global bandwidth collapses once a set
/// concentrates, after which every proposal repeats one configuration,
/// while the prior component keeps every region reachable.
fn fit_numeric(values: &[f64], transform: Transform, bounds: (f64, f64), integer: bool) -> Estimator {
    if values.is_empty() {
        return Estimator::Uniform(UniformDensity::new(transform, bounds, integer));
    }
    Estimator::Adaptive(
        AdaptiveKde::new(values, transform, bounds, integer).expect("fit inputs valid"),
    )
}

/// Fits one [`DensityPair`] per parameter: the good estimator on good-set
/// values, the bad estimator on bad-set values, falling back to the prior
/// uniform density when the bad set is empty.
pub fn build_density_model(split: &SplitResult, space: &SearchSpace) -> DensityModel {

    let pairs = space
        .params()
        .iter()
        .map(|domain| {
            let collect_nums = |obs: &[Observation]| -> Vec<f64> {
                obs.iter()
                    .map(|o| o.config.get(domain.name()).and_then(|v| v.as_f64()).unwrap())
                    .collect()
            };
            let pair = match domain.spec() {
                DomainSpec::Categorical { .. } => {
                    fn cats<'a>(obs: &'a [Observation], name: &str) -> Vec<&'a str> {
                        obs.iter()
                            .map(|o| o.config.get(name).and_then(|v| v.as_str()).unwrap())
                            .collect()
                    }
                    let good = fit_categorical(&cats(&split.good, domain.name()), domain, 1.0)
                        .expect("good values come from the domain");
                    let bad = fit_categorical(&cats(&split.bad, domain.name()), domain, 1.0)
                        .expect("bad values come from the domain");
                    DensityPair { good: Estimator::Pmf(good), bad: Estimator::Pmf(bad) }
                }
                spec => {
                    let transform = match spec {
                        DomainSpec::LogContinuous { .. } => Transform::Log10,
                        _ => Transform::Identity,
                    };
                    let integer = matches!(spec, DomainSpec::Integer { .. });
                    let bounds = domain.bounds().expect("numeric domain has bounds");
                    DensityPair {
                        good: fit_numeric(&collect_nums(&split.good), transform, bounds, integer),
                        bad: fit_numeric(&collect_nums(&split.bad), transform, bounds, integer),
                    }
                }
            };
            (domain.name().to_owned(), pair)
        })
        .collect();
    DensityModel { pairs }
}

/// `(gamma + (g/l) * (1 - gamma))^-1`; strictly increasing in `l/g`.
pub fn acquisition_score(l_val: f64, g_val: f64, gamma: f64) -> Result<f64, TpeError> {
    if !(l_val > 0.0 && g_val > 0.0) {
        return Err(TpeError::NonPositiveDensity { l: l_val, g: g_val });
    }
    Ok(1.0 / (gamma + (g_val / l_val) * (1.0 - gamma)))
}

/// `prod_j l(h_j)/g(h_j)`, accumulated in log space and exponentiated.
pub fn joint_ratio(config: &Configuration, model: &DensityModel) -> f64 {
    model.log_joint_ratio(config).exp()
}

/// Draws `n_candidates` configurations from the good densities and returns
/// the one maximizing the joint ratio; ties go to the earliest draw.
pub fn propose<R: Rng + ?Sized>(
    model: &DensityModel,
    settings: &TpeSettings,
    rng: &mut R,
) -> Configuration {
    let mut best: Option<(f64, Configuration)> = None;
    for _ in 0..settings.n_candidates {
        let mut candidate = Configuration::new();
        for (name, pair) in model.pairs() {
            candidate.set(name, pair.good.sample(rng));
        }
        let score = model.log_joint_ratio(&candidate);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    best.expect("n_candidates >= 1").1
}

/// Lowest-value observation, first occurrence on ties.
pub fn best_observation(history: &[Observation]) -> Option<&Observation> {
    history.iter().reduce(|best, o| if o.value < best.value { o } else { best })
}

/// A finished optimization run.
#[derive(Debug, Clone)]
pub struct TpeRun {
    pub best: Observation,
    pub history: Vec<Observation>,
}

/// Runs the full loop: `n_init` prior samples, then split, fit, propose and
/// evaluate until `max_iter` observations exist.
pub fn optimize<R: Rng + ?Sized>(
    objective: &mut dyn Objective,
    space: &SearchSpace,
    settings: &TpeSettings,
    rng: &mut R,
) -> Result<TpeRun, OptimizeError> {
    optimize_phase(objective, space, settings, rng, Phase::Simultaneous)
}

pub(crate) fn optimize_phase<R: Rng + ?Sized>(
    objective: &mut dyn Objective,
    space: &SearchSpace,
    settings: &TpeSettings,
    rng: &mut R,
    phase: Phase,
) -> Result<TpeRun, OptimizeError> {
    settings.validate().map_err(OptimizeError::Settings)?;
    let mut history: Vec<Observation> = Vec::with_capacity(settings.max_iter);
    for iteration in 0..settings.max_iter {
        let (config, tpe_seconds) = if iteration < settings.n_init {
            (space.sample_prior(rng), 0.0)
        } else {
            let started = Instant::now();
            let split = split_by_quantile(&history, settings.gamma).expect("history non-empty");
            let model = build_density_model(&split, space);
            let config = propose(&model, settings, rng);
            (config, started.elapsed().as_secs_f64())
        };

        let eval_started = Instant::now();
        let result = objective.evaluate(&config).and_then(|r| {
            if r.value.is_finite() {
                Ok(r)
            } else {
                Err(ObjectiveError::Failed(format!("non-finite objective value {}", r.value)))
            }
        });
        match result {
            Ok(result) => history.push(Observation {
                config,
                value: result.value,
                eval_seconds: eval_started.elapsed().as_secs_f64(),
                simulated_eval_seconds: result.simulated_eval_seconds,
                tpe_seconds,
                iteration,
                phase,
            }),
            Err(source) => {
                return Err(OptimizeError::Objective { iteration, source, history });
            }
        }
    }
    let best = best_observation(&history).expect("max_iter >= 1").clone();
    Ok(TpeRun { best, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::CategoricalPmf;
    use crate::objectives::FnObjective;
    use crate::space::{continuous_space, ParamDomain, ParamValue};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn obs(value: f64) -> Observation {
        let mut config = Configuration::new();
        config.set("x1", ParamValue::Float(value));
        Observation {
            config,
            value,
            eval_seconds: 0.0,
            simulated_eval_seconds: 0.0,
            tpe_seconds: 0.0,
            iteration: 0,
            phase: Phase::Simultaneous,
        }
    }

    #[test]
    fn split_sizes_and_threshold() {
        let history: Vec<Observation> = (0..15).map(|i| obs(i as f64)).collect();
        let split = split_by_quantile(&history, 0.25).unwrap();
        assert_eq!(split.good.len(), 4);
        assert_eq!(split.bad.len(), 11);

        let single = [obs(3.0)];
        let split = split_by_quantile(&single, 0.25).unwrap();
        assert_eq!((split.good.len(), split.bad.len()), (1, 0));

        let values = [3.0, 1.0, 2.0, 5.0, 4.0, 8.0, 7.0, 6.0];
        let history: Vec<Observation> = values.iter().map(|v| obs(*v)).collect();
        let split = split_by_quantile(&history, 0.25).unwrap();
        let good: Vec<f64> = split.good.iter().map(|o| o.value).collect();
        assert_eq!(good, [1.0, 2.0]);
        assert_eq!(split.threshold, 2.0);

        assert!(split_by_quantile(&[], 0.25).is_err());
    }

    #[test]
    fn threshold_ties_go_to_bad_in_insertion_order() {
        let history = [obs(1.0), obs(1.0), obs(1.0), obs(1.0)];
        let split = split_by_quantile(&history, 0.25).unwrap();
        assert_eq!(split.good.len(), 1);
        assert_eq!(split.bad.len(), 3);
        assert!(split.bad.iter().all(|o| o.value == split.threshold));
    }

    #[test]
    fn acquisition_values() {
        assert_abs_diff_eq!(acquisition_score(0.8, 0.2, 0.25).unwrap(), 2.2857142857, epsilon = 1e-9);
        assert_abs_diff_eq!(acquisition_score(0.2, 0.8, 0.25).unwrap(), 0.3076923077, epsilon = 1e-9);
        assert_eq!(acquisition_score(0.7, 0.7, 0.25).unwrap(), 1.0);
        assert!(acquisition_score(0.0, 1.0, 0.25).is_err());
        assert!(acquisition_score(1.0, -0.1, 0.25).is_err());
    }

    fn pmf(domain: &ParamDomain, counts: &[(&str, usize)]) -> CategoricalPmf {
        let values: Vec<&str> = counts
            .iter()
            .flat_map(|(c, n)| std::iter::repeat_n(*c, *n))
            .collect();
        fit_categorical(&values, domain, 1e-9).unwrap()
    }

    #[test]
    fn joint_ratio_multiplies_per_parameter_ratios() {
        // Two categorical parameters with per-parameter ratios 4 and 0.5.
        let a = ParamDomain::categorical("a", &["x", "y"], "x").unwrap();
        let b = ParamDomain::categorical("b", &["x", "y"], "x").unwrap();
        let model = DensityModel {
            pairs: vec![
                (
                    "a".into(),
                    DensityPair {
                        good: Estimator::Pmf(pmf(&a, &[("x", 8), ("y", 2)])),
                        bad: Estimator::Pmf(pmf(&a, &[("x", 2), ("y", 8)])),
                    },
                ),
                (
                    "b".into(),
                    DensityPair {
                        good: Estimator::Pmf(pmf(&b, &[("x", 4), ("y", 6)])),
                        bad: Estimator::Pmf(pmf(&b, &[("x", 8), ("y", 2)])),
                    },
                ),
            ],
        };
        let mut config = Configuration::new();
        config.set("a", ParamValue::Cat("x".into()));
        config.set("b", ParamValue::Cat("x".into()));
        assert_abs_diff_eq!(joint_ratio(&config, &model), 2.0, epsilon = 1e-6);

        let mut even = Configuration::new();
        even.set("a", ParamValue::Cat("x".into()));
        even.set("b", ParamValue::Cat("y".into()));
        // 4 * 3 = 12, sanity that the product really spans parameters.
        assert_abs_diff_eq!(joint_ratio(&even, &model), 12.0, epsilon = 1e-5);
    }

    #[test]
    fn argmax_of_joint_ratio_matches_acquisition() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..1000 {
            let gamma = rng.random_range(0.01..0.99);
            let n = rng.random_range(2..30);
            let ls: Vec<f64> = (0..n).map(|_| rng.random_range(1e-6..10.0)).collect();
            let gs: Vec<f64> = (0..n).map(|_| rng.random_range(1e-6..10.0)).collect();
            let by_ratio = (0..n)
                .max_by(|a, b| (ls[*a] / gs[*a]).total_cmp(&(ls[*b] / gs[*b])))
                .unwrap();
            let by_acq = (0..n)
                .max_by(|a, b| {
                    acquisition_score(ls[*a], gs[*a], gamma)
                        .unwrap()
                        .total_cmp(&acquisition_score(ls[*b], gs[*b], gamma).unwrap())
                })
                .unwrap();
            assert_eq!(by_ratio, by_acq);
        }
    }

    #[test]
    fn model_covers_every_parameter_and_falls_back_on_empty_bad() {
        let space = crate::space::cnn_search_space();
        let mut rng = StdRng::seed_from_u64(8);
        let history: Vec<Observation> = (0..4)
            .map(|i| {
                let mut o = obs(i as f64);
                o.config = space.sample_prior(&mut rng);
                o
            })
            .collect();
        let split = SplitResult { good: history.clone(), bad: vec![], threshold: 3.0 };
        let model = build_density_model(&split, &space);
        assert_eq!(model.pairs().len(), 10);
        let lr_pair = model.pair("lr").unwrap();
        assert!(matches!(lr_pair.bad, Estimator::Uniform(_)));
        // Uniform bad over log10 [1e-5, 1] has density 1/5 in log space.
        assert_abs_diff_eq!(
            lr_pair.bad.log_density(&ParamValue::Float(0.01)),
            (1.0f64 / 5.0).ln(),
            epsilon = 1e-12
        );
        let opt_pair = model.pair("optimizer").unwrap();
        assert_abs_diff_eq!(
            opt_pair.bad.log_density(&ParamValue::Cat("adam".into())).exp(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn degenerate_good_set_keeps_positive_bandwidth() {
        let space = crate::space::cnn_search_space();
        let defaults = crate::space::default_config(&space);
        let good: Vec<Observation> = (0..3)
            .map(|_| {
                let mut o = obs(1.0);
                o.config = defaults.clone();
                o
            })
            .collect();
        let split = SplitResult { good, bad: vec![], threshold: 1.0 };
        let model = build_density_model(&split, &space);
        match &model.pair("lr").unwrap().good {
            Estimator::Adaptive(kde) => assert!(kde.sigmas().iter().all(|s| *s > 0.0)),
            other => panic!("expected adaptive kde, got {other:?}"),
        }
        // Density is peaked at the repeated value.
        let pair = model.pair("lr").unwrap();
        let at_default = pair.good.log_density(&ParamValue::Float(0.01));
        let away = pair.good.log_density(&ParamValue::Float(0.9));
        assert!(at_default > away);
    }

    #[test]
    fn propose_is_deterministic_and_concentrates() {
        let space = continuous_space(2, 0.0, 1.0);
        let near = |v: f64| {
            let mut o = obs(0.0);
            let mut c = Configuration::new();
            c.set("x1", ParamValue::Float(v));
            c.set("x2", ParamValue::Float(v));
            o.config = c;
            o
        };
        let split = SplitResult {
            good: vec![near(0.5), near(0.501), near(0.499)],
            bad: vec![near(0.05), near(0.95), near(0.9)],
            threshold: 0.0,
        };
        let model = build_density_model(&split, &space);
        let settings = TpeSettings::new(100);

        let a = propose(&model, &settings, &mut StdRng::seed_from_u64(5));
        let b = propose(&model, &settings, &mut StdRng::seed_from_u64(5));
        assert_eq!(a, b);
        let x1 = a.get("x1").unwrap().as_f64().unwrap();
        assert!((0.2..=0.8).contains(&x1), "proposal {x1} strayed from the good mass");

        let single = TpeSettings { n_candidates: 1, ..TpeSettings::new(100) };
        let c = propose(&model, &single, &mut StdRng::seed_from_u64(9));
        let mut rng = StdRng::seed_from_u64(9);
        let mut manual = Configuration::new();
        for (name, pair) in model.pairs() {
            manual.set(name, pair.good.sample(&mut rng));
        }
        assert_eq!(c, manual);
    }

    #[test]
    fn optimize_on_constant_objective() {
        let space = continuous_space(2, -1.0, 1.0);
        let mut objective = FnObjective(|_: &Configuration| 1.0);
        let settings = TpeSettings::new(20);
        let mut rng = StdRng::seed_from_u64(3);
        let run = optimize(&mut objective, &space, &settings, &mut rng).unwrap();
        assert_eq!(run.history.len(), 20);
        assert_eq!(run.best.value, 1.0);
        assert!(run.history[..15].iter().all(|o| o.tpe_seconds == 0.0));
        assert!(run.history[15..].iter().all(|o| o.tpe_seconds >= 0.0));
    }

    #[test]
    fn optimize_is_deterministic_per_seed() {
        let space = continuous_space(3, -5.0, 5.0);
        let run = |seed: u64| {
            let mut objective = FnObjective(|c: &Configuration| {
                c.iter().map(|(_, v)| v.as_f64().unwrap().powi(2)).sum::<f64>()
            });
            let settings = TpeSettings::new(40);
            let mut rng = StdRng::seed_from_u64(seed);
            optimize(&mut objective, &space, &settings, &mut rng).unwrap()
        };
        let a = run(11);
        let b = run(11);
        assert_eq!(a.history.len(), b.history.len());
        for (x, y) in a.history.iter().zip(&b.history) {
            assert_eq!(x.config, y.config);
            assert_eq!(x.value.to_bits(), y.value.to_bits());
        }
        let c = run(12);
        assert!(a.history.iter().zip(&c.history).any(|(x, y)| x.config != y.config));
    }

    #[test]
    fn running_minimum_is_monotone() {
        let space = continuous_space(2, -5.0, 5.0);
        let mut objective = FnObjective(|c: &Configuration| {
            c.iter().map(|(_, v)| v.as_f64().unwrap().powi(2)).sum::<f64>()
        });
        let settings = TpeSettings::new(60);
        let mut rng = StdRng::seed_from_u64(21);
        let run = optimize(&mut objective, &space, &settings, &mut rng).unwrap();
        let mut incumbent = f64::INFINITY;
        for o in &run.history {
            let next = incumbent.min(o.value);
            assert!(next <= incumbent);
            incumbent = next;
        }
        assert_eq!(incumbent, run.best.value);
    }

    #[test]
    fn objective_failure_carries_partial_history() {
        let space = continuous_space(1, 0.0, 1.0);
        let mut calls = 0usize;
        let mut objective = FnObjective(move |_: &Configuration| {
            calls += 1;
            if calls > 7 {
                f64::NAN
            } else {
                calls as f64
            }
        });
        let settings = TpeSettings { n_init: 2, ..TpeSettings::new(20) };
        let mut rng = StdRng::seed_from_u64(2);
        match optimize(&mut objective, &space, &settings, &mut rng) {
            Err(OptimizeError::Objective { iteration, history, .. }) => {
                assert_eq!(iteration, 7);
                assert_eq!(history.len(), 7);
            }
            other => panic!("expected objective failure, got {other:?}"),
        }
    }

    #[test]
    fn settings_validation() {
        assert!(TpeSettings::new(100).validate().is_ok());
        assert!(TpeSettings { gamma: 0.0, ..TpeSettings::new(100) }.validate().is_err());
        assert!(TpeSettings { n_init: 1, ..TpeSettings::new(100) }.validate().is_err());
        assert!(TpeSettings { n_candidates: 0, ..TpeSettings::new(100) }.validate().is_err());
        assert!(TpeSettings::new(15).validate().is_ok());
        assert!(TpeSettings::new(10).validate().is_err());
        assert!(TpeSettings { n_init: 5, ..TpeSettings::new(10) }.validate().is_ok());
    }

    proptest! {
        #[test]
        fn split_partitions_any_history(values in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let history: Vec<Observation> = values.iter().map(|v| obs(*v)).collect();
            let split = split_by_quantile(&history, 0.25).unwrap();
            prop_assert_eq!(split.good.len() + split.bad.len(), history.len());
            prop_assert_eq!(split.good.len(), ((0.25 * history.len() as f64).ceil() as usize).max(1));
            let max_good = split.good.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(split.good.iter().all(|o| o.value <= split.threshold));
            prop_assert!(split.bad.iter().all(|o| o.value >= max_good));
        }

        #[test]
        fn acquisition_is_monotone_in_ratio(
            l1 in 1e-6f64..10.0, g1 in 1e-6f64..10.0,
            l2 in 1e-6f64..10.0, g2 in 1e-6f64..10.0,
            gamma in 0.01f64..0.99,
        ) {
            let (r1, r2) = (l1 / g1, l2 / g2);
            let (a1, a2) = (
                acquisition_score(l1, g1, gamma).unwrap(),
                acquisition_score(l2, g2, gamma).unwrap(),
            );
            if r1 < r2 {
                prop_assert!(a1 <= a2);
            } else if r1 > r2 {
                prop_assert!(a1 >= a2);
            }
        }
    }
}
