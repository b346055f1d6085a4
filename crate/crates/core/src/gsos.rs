//! Grouped sequential optimization: the search space is cut into
//! importance-ordered parameter groups and each group is optimized in turn
//! with every other parameter frozen at the current best configuration,
//! threading per-group bests forward.

use std::collections::BTreeMap;

use rand::Rng;

use crate::objectives::{EvalResult, Objective, ObjectiveError};
use crate::space::{validate, Configuration, SearchSpace};
use crate::tpe::{optimize_phase, Observation, OptimizeError, Phase, TpeSettings};

/// Non-negative importance weight per parameter; drives group ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceTable {
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum GsosError {
    #[error("importance weight for `{0}` is missing")]
    MissingWeight(String),

    #[error("importance weight for `{name}` is not finite or negative ({weight})")]
    BadWeight { name: String, weight: f64 },

    #[error("ratios must be positive and non-empty")]
    BadRatios,

    #[error("group cut points invalid: {0}")]
    BadCutPoints(String),

    #[error("groups do not partition the space: {0}")]
    NotAPartition(String),

    #[error("group budget {budget} for group {index} is below the minimum of 2")]
    BudgetTooSmall { index: usize, budget: usize },

    #[error("groups must be ordered by non-increasing maximum importance (group {0} breaks it)")]
    NotImportanceOrdered(usize),

    #[error("no default grouping for {k} groups over {params} parameters; pass explicit sizes")]
    NoDefaultCuts { k: usize, params: usize },
}

impl ImportanceTable {
    pub fn new(weights: BTreeMap<String, f64>) -> Self {
        ImportanceTable { weights }
    }

    /// Equal weight for every parameter; group order then follows the
    /// space's declaration order.
    pub fn uniform(space: &SearchSpace) -> Self {
        ImportanceTable {
            weights: space.params().iter().map(|p| (p.name().to_owned(), 1.0)).collect(),
        }
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.weights.get(name).copied()
    }

    pub fn validate_for(&self, space: &SearchSpace) -> Result<(), GsosError> {
        for p in space.params() {
            match self.weight(p.name()) {
                None => return Err(GsosError::MissingWeight(p.name().to_owned())),
                Some(w) if !w.is_finite() || w < 0.0 => {
                    return Err(GsosError::BadWeight { name: p.name().to_owned(), weight: w })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Importance weights for the built-in CNN space. The four leading weights
/// are measured; the remaining six are nominal placeholders that fix the
/// ordering (see `data/cnn_importance.toml`).
pub fn cnn_importance_table() -> ImportanceTable {
    let weights = [
        ("num_conv_layers", 0.385),
        ("lr", 0.228),
        ("dropout_rate", 0.131),
        ("optimizer", 0.115),
        ("epoch", 0.095),
        ("stride", 0.075),
        ("padding", 0.055),
        ("kernel", 0.035),
        ("num_fc_units", 0.020),
        ("batch_size", 0.015),
    ];
    ImportanceTable {
        weights: weights.iter().map(|(n, w)| ((*n).to_owned(), *w)).collect(),
    }
}

/// Ordered parameter groups with per-group iteration budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlan {
    groups: Vec<Vec<String>>,
    budgets: Vec<usize>,
}

impl GroupPlan {
    /// Validates the partition, budget and ordering invariants.
    pub fn new(
        groups: Vec<Vec<String>>,
        budgets: Vec<usize>,
        table: &ImportanceTable,
        space: &SearchSpace,
    ) -> Result<Self, GsosError> {
        if groups.len() != budgets.len() {
            return Err(GsosError::BadCutPoints(format!(
                "{} groups but {} budgets",
                groups.len(),
                budgets.len()
            )));
        }
        table.validate_for(space)?;
        let mut seen: Vec<&str> = Vec::new();
        for g in &groups {
            for name in g {
                if space.get(name).is_none() {
                    return Err(GsosError::NotAPartition(format!("unknown parameter `{name}`")));
                }
                if seen.contains(&name.as_str()) {
                    return Err(GsosError::NotAPartition(format!("parameter `{name}` repeats")));
                }
                seen.push(name);
            }
        }
        if seen.len() != space.len() {
            return Err(GsosError::NotAPartition(format!(
                "{} of {} parameters covered",
                seen.len(),
                space.len()
            )));
        }
        for (index, budget) in budgets.iter().enumerate() {
            if *budget < 2 {
                return Err(GsosError::BudgetTooSmall { index, budget: *budget });
            }
        }
        let max_weight = |g: &[String]| {
            g.iter().map(|n| table.weight(n).unwrap()).fold(f64::NEG_INFINITY, f64::max)
        };
        for i in 1..groups.len() {
            if max_weight(&groups[i]) > max_weight(&groups[i - 1]) {
                return Err(GsosError::NotImportanceOrdered(i));
            }
        }
        Ok(GroupPlan { groups, budgets })
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn total_iterations(&self) -> usize {
        self.budgets.iter().sum()
    }
}

/// Sorts parameters by descending weight (declaration order breaks ties),
/// cuts them into contiguous groups and splits `total_iters` by `ratios`,
/// the last budget absorbing the rounding remainder.
///
/// `group_sizes` gives the cut points explicitly; without it the layout is
/// all-in-one for one group, or `[3, 3, rest]` for the canonical three-group
/// split.
pub fn build_group_plan(
    table: &ImportanceTable,
    space: &SearchSpace,
    total_iters: usize,
    ratios: &[f64],
    group_sizes: Option<&[usize]>,
) -> Result<GroupPlan, GsosError> {
    let k = ratios.len();
    if k == 0 || ratios.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(GsosError::BadRatios);
    }
    table.validate_for(space)?;
    let j = space.len();
    if k > j {
        return Err(GsosError::BadCutPoints(format!("{k} groups for {j} parameters")));
    }

    let mut names: Vec<String> = space.params().iter().map(|p| p.name().to_owned()).collect();
    names.sort_by(|a, b| table.weight(b).unwrap().total_cmp(&table.weight(a).unwrap()));

    let sizes: Vec<usize> = match group_sizes {
        Some(s) => s.to_vec(),
        None if k == 1 => vec![j],
        None if k == 3 && j >= 7 => vec![3, 3, j - 6],
        None => return Err(GsosError::NoDefaultCuts { k, params: j }),
    };
    if sizes.len() != k || sizes.iter().any(|s| *s == 0) || sizes.iter().sum::<usize>() != j {
        return Err(GsosError::BadCutPoints(format!(
            "sizes {sizes:?} do not cut {j} parameters into {k} groups"
        )));
    }

    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for s in &sizes {
        groups.push(names[start..start + s].to_vec());
        start += s;
    }

    let ratio_sum: f64 = ratios.iter().sum();
    let mut budgets = Vec::with_capacity(k);
    let mut assigned = 0usize;
    for (i, r) in ratios.iter().enumerate() {
        let b = if i + 1 == k {
            total_iters.saturating_sub(assigned)
        } else {
            (total_iters as f64 * r / ratio_sum).round() as usize
        };
        assigned += b;
        budgets.push(b);
    }
    GroupPlan::new(groups, budgets, table, space)
}

/// Objective over a group subspace: merges group assignments over a frozen
/// full configuration and evaluates the inner objective on the result.
pub struct RestrictedObjective<'a> {
    inner: &'a mut dyn Objective,
    frozen: Configuration,
    group: Vec<String>,
}

pub fn restrict_objective<'a>(
    inner: &'a mut dyn Objective,
    frozen: Configuration,
    group: Vec<String>,
) -> RestrictedObjective<'a> {
    RestrictedObjective { inner, frozen, group }
}

impl Objective for RestrictedObjective<'_> {
    fn evaluate(&mut self, sub: &Configuration) -> Result<EvalResult, ObjectiveError> {
        for (name, _) in sub.iter() {
            if !self.group.iter().any(|g| g == name) {
                return Err(ObjectiveError::Failed(format!(
                    "parameter `{name}` is outside the active group"
                )));
            }
        }
        let merged = self.frozen.merged_with(sub);
        self.inner.evaluate(&merged)
    }
}

/// A finished grouped sequential run.
#[derive(Debug, Clone)]
pub struct GsosRun {
    pub x_optimal: Configuration,
    pub history: Vec<Observation>,
}

/// Runs TPE group by group. Each phase `k` gets `budgets[k]` iterations with
/// `n_init = min(15, max(2, budget/3))`, so small group budgets are not
/// swallowed by prior sampling; the phase best then updates the current
/// configuration before the next group starts. Observations carry the
/// merged full configuration, a run-global iteration index and their phase.
pub fn gsos_optimize<R: Rng + ?Sized>(
    objective: &mut dyn Objective,
    space: &SearchSpace,
    plan: &GroupPlan,
    defaults: &Configuration,
    template: &TpeSettings,
    rng: &mut R,
) -> Result<GsosRun, OptimizeError> {
    validate(defaults, space).expect("defaults must be valid for the space");

    let mut x_current = defaults.clone();
    let mut history: Vec<Observation> = Vec::with_capacity(plan.total_iterations());
    let mut offset = 0usize;

    for (index, (group, budget)) in plan.groups().iter().zip(plan.budgets()).enumerate() {
        let phase = Phase::Group(index + 1);
        let subspace = space.restrict_to(group);
        let settings = TpeSettings {
            n_init: (budget / 3).clamp(2, 15),
            gamma: template.gamma,
            n_candidates: template.n_candidates,
            max_iter: *budget,
        };
        let frozen = x_current.clone();
        let merge = |o: Observation| -> Observation {
            Observation {
                config: frozen.merged_with(&o.config),
                iteration: offset + o.iteration,
                ..o
            }
        };

        let outcome = {
            let mut restricted = restrict_objective(objective, frozen.clone(), group.clone());
            optimize_phase(&mut restricted, &subspace, &settings, rng, phase)
        };
        match outcome {
            Ok(run) => {
                for name in group {
                    let v = run.best.config.get(name).expect("best covers its group").clone();
                    x_current.set(name, v);
                }
                history.extend(run.history.into_iter().map(merge));
                offset += budget;
            }
            Err(OptimizeError::Objective { iteration, source, history: partial }) => {
                history.extend(partial.into_iter().map(merge));
                return Err(OptimizeError::Objective {
                    iteration: offset + iteration,
                    source,
                    history,
                });
            }
            Err(err) => return Err(err),
        }
    }
    Ok(GsosRun { x_optimal: x_current, history })
}
