//! Experiment runner: grouped-sequential vs simultaneous comparisons over
//! multiple rounds, summary metrics, the TPE-overhead timing study, and
//! CSV export of everything.
//!
//! Time metrics run on the virtual clock (simulated evaluation seconds plus
//! measured TPE seconds) so results are hardware-independent; only the
//! timing study reports raw wall clock, because wall-clock TPE overhead is
//! its subject.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::gsos::{build_group_plan, cnn_importance_table, gsos_optimize, GroupPlan, ImportanceTable};
use crate::objectives::{
    delayed_random_space, sphere_space, DelayedRandomObjective, Objective, SphereObjective,
    SurrogateCnn,
};
use crate::space::{default_config, SearchSpace};
use crate::tpe::{best_observation, optimize, Observation, OptimizeError, TpeSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    GroupedSequential,
    Simultaneous,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::GroupedSequential => f.write_str("grouped_sequential"),
            Strategy::Simultaneous => f.write_str("simultaneous"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grouped_sequential" => Ok(Strategy::GroupedSequential),
            "simultaneous" => Ok(Strategy::Simultaneous),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown objective `{0}` (expected one of: surrogate_cnn, sphere5)")]
    UnknownObjective(String),

    #[error("iters must be at least 10 (got {0})")]
    TooFewIterations(usize),

    #[error("round {round} (seed {seed}) failed: {source}")]
    RunFailed {
        round: usize,
        seed: u64,
        #[source]
        source: Box<OptimizeError>,
    },

    #[error("summary needs at least one record per strategy")]
    EmptyRecords,

    #[error(transparent)]
    Plan(#[from] crate::gsos::GsosError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One optimization run with its virtual-clock metrics.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub strategy: Strategy,
    pub objective_id: String,
    pub round: usize,
    pub seed: u64,
    pub history: Vec<Observation>,
    pub best: Observation,
    /// Virtual seconds elapsed when the run's best value first appeared.
    pub time_to_best_seconds: f64,
    pub total_time_seconds: f64,
}

/// Everything needed to run one benchmark objective under either strategy.
struct Benchmark {
    space: SearchSpace,
    importance: ImportanceTable,
    group_sizes: Option<Vec<usize>>,
}

impl Benchmark {
    fn for_id(objective_id: &str) -> Result<Self, HarnessError> {
        match objective_id {
            "surrogate_cnn" => Ok(Benchmark {
                space: SurrogateCnn::default().space().clone(),
                importance: cnn_importance_table(),
                group_sizes: None,
            }),
            "sphere5" => Ok(Benchmark {
                space: sphere_space(5),
                importance: ImportanceTable::uniform(&sphere_space(5)),
                group_sizes: Some(vec![2, 2, 1]),
            }),
            other => Err(HarnessError::UnknownObjective(other.to_owned())),
        }
    }

    fn make_objective(&self, objective_id: &str) -> Box<dyn Objective> {
        match objective_id {
            "surrogate_cnn" => Box::new(SurrogateCnn::default()),
            "sphere5" => Box::new(SphereObjective::new(5)),
            _ => unreachable!("ids validated in for_id"),
        }
    }

    fn plan(&self, iters: usize) -> Result<GroupPlan, HarnessError> {
        Ok(build_group_plan(
            &self.importance,
            &self.space,
            iters,
            &[4.0, 3.0, 3.0],
            self.group_sizes.as_deref(),
        )?)
    }
}

/// The group plan a grouped run of `objective_id` would use.
pub fn default_group_plan(objective_id: &str, iters: usize) -> Result<GroupPlan, HarnessError> {
    Benchmark::for_id(objective_id)?.plan(iters)
}

fn virtual_seconds(o: &Observation) -> f64 {
    o.simulated_eval_seconds + o.tpe_seconds
}

/// Default settings for a run of `iters` iterations; short runs cap the
/// initial sample count at the run length.
fn experiment_settings(iters: usize) -> TpeSettings {
    let mut settings = TpeSettings::new(iters);
    settings.n_init = settings.n_init.min(iters);
    settings
}

fn record_from_history(
    strategy: Strategy,
    objective_id: &str,
    round: usize,
    seed: u64,
    history: Vec<Observation>,
) -> RunRecord {
    let best = best_observation(&history).expect("non-empty history").clone();
    let mut elapsed = 0.0;
    let mut time_to_best = 0.0;
    let mut seen_best = false;
    for o in &history {
        elapsed += virtual_seconds(o);
        if !seen_best && o.value == best.value {
            time_to_best = elapsed;
            seen_best = true;
        }
    }
    RunRecord {
        strategy,
        objective_id: objective_id.to_owned(),
        round,
        seed,
        history,
        best,
        time_to_best_seconds: time_to_best,
        total_time_seconds: elapsed,
    }
}

/// Runs `rounds` independent optimizations of `objective_id` under one
/// strategy, seeding round `i` with `base_seed + i`. Grouped runs use the
/// canonical 4:3:3 plan over `iters`; simultaneous runs use one TPE run.
pub fn run_experiment(
    strategy: Strategy,
    objective_id: &str,
    rounds: usize,
    iters: usize,
    base_seed: u64,
) -> Result<Vec<RunRecord>, HarnessError> {
    if iters < 10 {
        return Err(HarnessError::TooFewIterations(iters));
    }
    let bench = Benchmark::for_id(objective_id)?;
    let mut records = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let seed = base_seed.wrapping_add(round as u64);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut objective = bench.make_objective(objective_id);
        let failed = |source: OptimizeError| HarnessError::RunFailed {
            round,
            seed,
            source: Box::new(source),
        };
        let history = match strategy {
            Strategy::Simultaneous => {
                let settings = experiment_settings(iters);
                optimize(objective.as_mut(), &bench.space, &settings, &mut rng)
                    .map_err(failed)?
                    .history
            }
            Strategy::GroupedSequential => {
                let plan = bench.plan(iters)?;
                let defaults = default_config(&bench.space);
                let template = experiment_settings(iters);
                gsos_optimize(objective.as_mut(), &bench.space, &plan, &defaults, &template, &mut rng)
                    .map_err(failed)?
                    .history
            }
        };
        records.push(record_from_history(strategy, objective_id, round, seed, history));
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyStats {
    pub avg_time_to_best_seconds: f64,
    pub avg_total_time_seconds: f64,
    pub avg_best_value: f64,
}

fn stats(records: &[RunRecord]) -> StrategyStats {
    let n = records.len() as f64;
    StrategyStats {
        avg_time_to_best_seconds: records.iter().map(|r| r.time_to_best_seconds).sum::<f64>() / n,
        avg_total_time_seconds: records.iter().map(|r| r.total_time_seconds).sum::<f64>() / n,
        avg_best_value: records.iter().map(|r| r.best.value).sum::<f64>() / n,
    }
}

/// Cross-strategy summary: per-strategy averages, the percentage of total
/// optimization time saved by grouping, and the best-value delta
/// (grouped minus simultaneous; negative means grouped found lower loss).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    pub grouped: StrategyStats,
    pub simultaneous: StrategyStats,
    pub time_reduction_percent: f64,
    pub value_change: f64,
}

pub fn summarize(
    grouped: &[RunRecord],
    simultaneous: &[RunRecord],
) -> Result<ComparisonSummary, HarnessError> {
    if grouped.is_empty() || simultaneous.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    let g = stats(grouped);
    let s = stats(simultaneous);
    let time_reduction_percent = if s.avg_total_time_seconds > 0.0 {
        100.0 * (1.0 - g.avg_total_time_seconds / s.avg_total_time_seconds)
    } else {
        0.0
    };
    let value_change = g.avg_best_value - s.avg_best_value;
    Ok(ComparisonSummary { grouped: g, simultaneous: s, time_reduction_percent, value_change })
}

/// One row of the TPE-overhead study.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub dims: usize,
    pub tpe_seconds: f64,
}

/// For each dimension count, runs simultaneous TPE on the delayed random
/// objective and sums the measured per-iteration TPE seconds.
pub fn timing_study(d_values: &[usize], iters: usize, delay: f64) -> Vec<TimingRow> {
    d_values
        .iter()
        .map(|d| {
            let space = delayed_random_space(*d);
            let mut objective = DelayedRandomObjective::new(delay, 1000 + *d as u64);
            let settings = experiment_settings(iters);
            let mut rng = StdRng::seed_from_u64(*d as u64);
            let run = optimize(&mut objective, &space, &settings, &mut rng)
                .expect("delayed objective does not fail");
            TimingRow {
                dims: *d,
                tpe_seconds: run.history.iter().map(|o| o.tpe_seconds).sum(),
            }
        })
        .collect()
}

/// Raw per-iteration points behind accuracy-vs-iteration scatter plots.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub iteration: usize,
    pub value: f64,
    pub strategy: Strategy,
}

pub fn scatter_data(records: &[RunRecord]) -> Vec<ScatterPoint> {
    records
        .iter()
        .flat_map(|r| {
            r.history.iter().map(|o| ScatterPoint {
                iteration: o.iteration,
                value: o.value,
                strategy: r.strategy,
            })
        })
        .collect()
}

/// Floats are serialized with 10 significant digits so repeated exports of
/// the same records are byte-identical.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn create(path: &Path) -> Result<std::fs::File, HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        }
    }
    std::fs::File::create(path)
        .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

/// Per-iteration CSV: one row per observation with the full configuration
/// spread over one column per parameter, ordered by round then iteration.
pub fn export_records_csv(
    records: &[RunRecord],
    space: &SearchSpace,
    path: &Path,
) -> Result<(), HarnessError> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.strategy.to_string(), r.round));

    let mut file = create(path)?;
    let mut header: Vec<String> =
        ["strategy", "objective", "round", "seed", "iteration", "phase"]
            .iter()
            .map(|s| (*s).to_owned())
            .collect();
    header.extend(space.params().iter().map(|p| p.name().to_owned()));
    header.extend(
        ["value", "simulated_eval_seconds", "tpe_seconds", "running_best"]
            .iter()
            .map(|s| (*s).to_owned()),
    );
    writeln!(file, "{}", header.join(",")).map_err(io_err(path))?;

    for record in sorted {
        let mut running_best = f64::INFINITY;
        for o in &record.history {
            running_best = running_best.min(o.value);
            let mut row: Vec<String> = vec![
                record.strategy.to_string(),
                record.objective_id.clone(),
                record.round.to_string(),
                record.seed.to_string(),
                o.iteration.to_string(),
                o.phase.to_string(),
            ];
            for p in space.params() {
                let v = o.config.get(p.name()).expect("history configs cover the space");
                row.push(match v {
                    crate::space::ParamValue::Float(x) => fmt_float(*x),
                    other => other.to_string(),
                });
            }
            row.push(fmt_float(o.value));
            row.push(fmt_float(o.simulated_eval_seconds));
            row.push(fmt_float(o.tpe_seconds));
            row.push(fmt_float(running_best));
            writeln!(file, "{}", row.join(",")).map_err(io_err(path))?;
        }
    }
    Ok(())
}

/// Summary CSV: one row per strategy with its averages; the cross-strategy
/// reduction and value-change columns repeat on both rows.
pub fn export_summary_csv(summary: &ComparisonSummary, path: &Path) -> Result<(), HarnessError> {
    let mut file = create(path)?;
    writeln!(
        file,
        "strategy,avg_time_to_best_seconds,avg_total_time_seconds,avg_best_value,time_reduction_percent,value_change"
    )
    .map_err(io_err(path))?;
    for (name, s) in [
        ("grouped_sequential", &summary.grouped),
        ("simultaneous", &summary.simultaneous),
    ] {
        writeln!(
            file,
            "{},{},{},{},{},{}",
            name,
            fmt_float(s.avg_time_to_best_seconds),
            fmt_float(s.avg_total_time_seconds),
            fmt_float(s.avg_best_value),
            fmt_float(summary.time_reduction_percent),
            fmt_float(summary.value_change),
        )
        .map_err(io_err(path))?;
    }
    Ok(())
}

pub fn export_timing_csv(rows: &[TimingRow], path: &Path) -> Result<(), HarnessError> {
    let mut file = create(path)?;
    writeln!(file, "num_hyperparameters,tpe_seconds").map_err(io_err(path))?;
    for row in rows {
        writeln!(file, "{},{}", row.dims, fmt_float(row.tpe_seconds)).map_err(io_err(path))?;
    }
    Ok(())
}

pub fn export_scatter_csv(points: &[ScatterPoint], path: &Path) -> Result<(), HarnessError> {
    let mut file = create(path)?;
    writeln!(file, "iteration,value,strategy").map_err(io_err(path))?;
    for p in points {
        writeln!(file, "{},{},{}", p.iteration, fmt_float(p.value), p.strategy)
            .map_err(io_err(path))?;
    }
    Ok(())
}
