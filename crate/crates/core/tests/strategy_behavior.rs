//! Cross-module behavior of the grouped sequential strategy on the
//! surrogate objective, which is separable with a known minimizer.

use gsos_core::gsos::{build_group_plan, cnn_importance_table, gsos_optimize};
use gsos_core::harness::{run_experiment, Strategy};
use gsos_core::objectives::SurrogateCnn;
use gsos_core::space::default_config;
use gsos_core::tpe::TpeSettings;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn gsos_recovers_the_separable_minimizer_on_most_seeds() {
    let table = cnn_importance_table();
    let space = SurrogateCnn::default().space().clone();
    let plan = build_group_plan(&table, &space, 100, &[4.0, 3.0, 3.0], None).unwrap();
    let defaults = default_config(&space);
    let min_loss = SurrogateCnn::default().definition().minimizer.loss;

    let mut hits = 0usize;
    let seeds = 20usize;
    for seed in 0..seeds as u64 {
        let mut objective = SurrogateCnn::default();
        let run = gsos_optimize(
            &mut objective,
            &space,
            &plan,
            &defaults,
            &TpeSettings::new(100),
            &mut StdRng::seed_from_u64(5000 + seed),
        )
        .unwrap();
        let residual = SurrogateCnn::default().loss(&run.x_optimal) - min_loss;
        assert!(residual >= -1e-12, "x_optimal beat the recorded minimizer");
        if residual <= 0.10 {
            hits += 1;
        }
    }
    assert!(
        hits * 5 >= seeds * 4,
        "only {hits}/{seeds} seeds landed within 0.10 of the minimum loss"
    );
}

#[test]
fn grouped_runs_spend_less_virtual_time_on_the_surrogate() {
    let grouped = run_experiment(Strategy::GroupedSequential, "surrogate_cnn", 2, 60, 77).unwrap();
    let simultaneous = run_experiment(Strategy::Simultaneous, "surrogate_cnn", 2, 60, 77).unwrap();
    let total = |rs: &[gsos_core::harness::RunRecord]| {
        rs.iter().map(|r| r.total_time_seconds).sum::<f64>()
    };
    assert!(total(&grouped) < total(&simultaneous));
}
