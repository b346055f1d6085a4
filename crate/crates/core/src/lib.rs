//! Hyperparameter optimization with a Tree-structured Parzen Estimator and
//! a grouped sequential search strategy.
//!
//! The pieces, bottom to top:
//!
//! - [`space`]: parameter domains, search spaces, configurations, prior
//!   sampling and validation.
//! - [`density`]: Gaussian-kernel density estimation for numeric parameters
//!   and smoothed frequency tables for categorical ones.
//! - [`tpe`]: the TPE loop — quantile split into good/bad sets,
//!   per-parameter density fitting, acquisition scoring and proposal.
//! - [`gsos`]: grouped sequential optimization — importance-ordered
//!   parameter groups optimized one at a time with everything else frozen
//!   at the current best configuration.
//! - [`objectives`]: benchmark objectives, including a surrogate CNN
//!   objective with an evaluation-cost model for virtual-clock studies.
//! - [`harness`]: experiment runner comparing the two strategies, summary
//!   metrics, the TPE-overhead timing study and CSV export.
//! - [`config_file`]: TOML loaders for spaces, importance tables and group
//!   layouts; the canonical CNN files ship embedded.
//!
//! ```
//! use gsos_core::prelude::*;
//! use rand::{rngs::StdRng, SeedableRng};
//!
//! let space = continuous_space(2, -5.0, 5.0);
//! let mut objective = FnObjective(|c: &Configuration| {
//!     c.iter().map(|(_, v)| v.as_f64().unwrap().powi(2)).sum::<f64>()
//! });
//! let settings = TpeSettings::new(60);
//! let mut rng = StdRng::seed_from_u64(7);
//! let run = optimize(&mut objective, &space, &settings, &mut rng).unwrap();
//! assert!(run.best.value < 5.0);
//! ```

pub mod config_file;
pub mod density;
pub mod gsos;
pub mod harness;
pub mod objectives;
pub mod space;
pub mod tpe;

pub mod prelude {
    pub use crate::gsos::{
        build_group_plan, cnn_importance_table, gsos_optimize, restrict_objective, GroupPlan,
        GsosRun, ImportanceTable,
    };
    pub use crate::harness::{
        run_experiment, scatter_data, summarize, timing_study, ComparisonSummary, RunRecord,
        Strategy,
    };
    pub use crate::objectives::{
        delayed_random_space, sphere, sphere_space, DelayedRandomObjective, EvalResult,
        FnObjective, Objective, SphereObjective, SurrogateCnn,
    };
    pub use crate::space::{
        cnn_search_space, continuous_space, default_config, validate, Configuration, ParamDomain,
        ParamValue, SearchSpace,
    };
    pub use crate::tpe::{
        optimize, Observation, Phase, TpeRun, TpeSettings,
    };
}
