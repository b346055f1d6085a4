//! `gsos` — experiment runner comparing grouped-sequential and simultaneous
//! TPE optimization, with CSV output.
//!
//! Any flag can also come from a TOML config file (`--config`); explicit
//! flags override file values.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use gsos_core::config_file::CNN_SPACE_TOML;
use gsos_core::harness::{
    export_records_csv, export_scatter_csv, export_summary_csv, export_timing_csv, run_experiment,
    scatter_data, summarize, timing_study, RunRecord, Strategy,
};
use gsos_core::objectives::{sphere_space, SurrogateCnn};
use gsos_core::space::SearchSpace;

#[derive(Parser)]
#[command(name = "gsos", version, about = "Hyperparameter-optimization benchmark harness")]
struct Cli {
    /// TOML file supplying defaults for any flag (flags override it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy and write the per-iteration CSV.
    Run {
        /// grouped_sequential or simultaneous.
        #[arg(long)]
        strategy: Option<String>,
        /// Objective id: surrogate_cnn or sphere5.
        #[arg(long)]
        objective: Option<String>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both strategies, then write per-iteration, summary and scatter CSVs.
    Compare {
        #[arg(long)]
        objective: Option<String>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure per-run TPE overhead on the delayed random objective.
    Timing {
        /// Dimension counts, e.g. "1-12" or "1,2,4,8".
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        iters: Option<usize>,
        /// Simulated evaluation delay in seconds.
        #[arg(long)]
        delay: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the canonical CNN search space.
    Spaces,
}

/// File-backed defaults; every key mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    strategy: Option<String>,
    objective: Option<String>,
    rounds: Option<usize>,
    iters: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    dims: Option<String>,
    delay: Option<f64>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("cannot parse {}", p.display()))
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn parse_dims(spec: &str) -> Result<Vec<usize>> {
    let mut dims = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if let Some((a, b)) = token.split_once('-') {
            let a: usize = a.trim().parse().with_context(|| format!("bad dims token `{token}`"))?;
            let b: usize = b.trim().parse().with_context(|| format!("bad dims token `{token}`"))?;
            if a == 0 || b < a {
                bail!("bad dims range `{token}`");
            }
            dims.extend(a..=b);
        } else {
            let d: usize = token.parse().with_context(|| format!("bad dims token `{token}`"))?;
            if d == 0 {
                bail!("dims must be positive");
            }
            dims.push(d);
        }
    }
    if dims.is_empty() {
        bail!("no dimensions given");
    }
    Ok(dims)
}

fn space_for(objective: &str) -> Result<SearchSpace> {
    match objective {
        "surrogate_cnn" => Ok(SurrogateCnn::default().space().clone()),
        "sphere5" => Ok(sphere_space(5)),
        other => bail!("unknown objective `{other}` (expected surrogate_cnn or sphere5)"),
    }
}

fn print_record_stats(records: &[RunRecord]) {
    for r in records {
        println!(
            "  {} round {} (seed {}): best {:.6} after {:.1}s virtual, total {:.1}s",
            r.strategy, r.round, r.seed, r.best.value, r.time_to_best_seconds, r.total_time_seconds
        );
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = load_file_config(cli.config.as_deref())?;

    match cli.command {
        Command::Run { strategy, objective, rounds, iters, seed, out } => {
            let strategy = match strategy.or(file.strategy.clone()) {
                Some(s) => Strategy::from_str(&s).map_err(anyhow::Error::msg)?,
                None => bail!("--strategy is required (grouped_sequential or simultaneous)"),
            };
            let objective = pick(objective, file.objective.clone(), "surrogate_cnn".into());
            let rounds = pick(rounds, file.rounds, 5);
            let iters = pick(iters, file.iters, 100);
            let seed = pick(seed, file.seed, 42);
            let out = pick(out, file.out.clone(), PathBuf::from("results"));

            let records = run_experiment(strategy, &objective, rounds, iters, seed)?;
            let space = space_for(&objective)?;
            let path = out.join("iterations.csv");
            export_records_csv(&records, &space, &path)?;
            print_record_stats(&records);
            println!("wrote {}", path.display());
        }
        Command::Compare { objective, rounds, iters, seed, out } => {
            let objective = pick(objective, file.objective.clone(), "surrogate_cnn".into());
            let rounds = pick(rounds, file.rounds, 5);
            let iters = pick(iters, file.iters, 100);
            let seed = pick(seed, file.seed, 42);
            let out = pick(out, file.out.clone(), PathBuf::from("results"));

            let grouped = run_experiment(Strategy::GroupedSequential, &objective, rounds, iters, seed)?;
            let simultaneous =
                run_experiment(Strategy::Simultaneous, &objective, rounds, iters, seed)?;
            let summary = summarize(&grouped, &simultaneous)?;
            let space = space_for(&objective)?;

            let all: Vec<RunRecord> = grouped.iter().chain(&simultaneous).cloned().collect();
            let iter_path = out.join("iterations.csv");
            export_records_csv(&all, &space, &iter_path)?;
            let summary_path = out.join("summary.csv");
            export_summary_csv(&summary, &summary_path)?;
            let scatter_path = out.join("scatter.csv");
            export_scatter_csv(&scatter_data(&all), &scatter_path)?;

            print_record_stats(&all);
            println!(
                "time reduction: {:.3}%  (grouped {:.1}s vs simultaneous {:.1}s virtual)",
                summary.time_reduction_percent,
                summary.grouped.avg_total_time_seconds,
                summary.simultaneous.avg_total_time_seconds
            );
            println!(
                "best-value change (grouped - simultaneous): {:+.6}",
                summary.value_change
            );
            for p in [&iter_path, &summary_path, &scatter_path] {
                println!("wrote {}", p.display());
            }
        }
        Command::Timing { dims, iters, delay, out } => {
            let dims = parse_dims(&pick(dims, file.dims.clone(), "1-12".into()))?;
            let iters = pick(iters, file.iters, 100);
            let delay = pick(delay, file.delay, 0.01);
            let out = pick(out, file.out.clone(), PathBuf::from("results"));

            let rows = timing_study(&dims, iters, delay);
            for row in &rows {
                println!("  d = {:3}  t_tpe = {:.4}s", row.dims, row.tpe_seconds);
            }
            let path = out.join("timing.csv");
            export_timing_csv(&rows, &path)?;
            println!("wrote {}", path.display());
        }
        Command::Spaces => {
            print!("{CNN_SPACE_TOML}");
        }
    }
    Ok(())
}
