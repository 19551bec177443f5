use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use evshock::experiments::output::{write_snapshot, Snapshot};
use evshock::experiments::suite::{build_scheme, problem_for, sample_solution};
use evshock::experiments::{
    emit_results, parse_config_file, read_table, run_experiment_with, ExperimentConfig, RunReport,
};
use evshock::{advance_to, ExperimentId, StepController};

#[derive(Parser)]
#[command(
    name = "evshock",
    version,
    about = "Entropy viscosity convergence studies for Burgers' equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a configuration file and write results.csv and summary.json
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Only run experiments with this id
        #[arg(long)]
        experiment: Option<ExperimentId>,
        /// Output directory; overrides `out_dir` from the file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print observed rates from a results table
    Rates {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write sampled solutions at one grid size and time
    Snapshot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        /// Defaults to each experiment's final time
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        experiment: Option<ExperimentId>,
        #[arg(long, default_value = "snapshots")]
        out: PathBuf,
        /// Sample points per cell
        #[arg(long, default_value_t = 8)]
        per_cell: usize,
    },
}

fn selected(path: &Path, only: Option<ExperimentId>) -> Result<(Option<PathBuf>, Vec<ExperimentConfig>)> {
    let suite = parse_config_file(path).with_context(|| format!("reading {}", path.display()))?;
    let experiments: Vec<_> = suite
        .experiments
        .into_iter()
        .filter(|c| only.is_none_or(|id| c.id == id))
        .collect();
    if experiments.is_empty() {
        bail!("no experiments selected from {}", path.display());
    }
    Ok((suite.out_dir, experiments))
}

fn cell(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$e}")).unwrap_or_else(|| "-".into())
}

fn run(config: &Path, only: Option<ExperimentId>, out: Option<PathBuf>) -> Result<()> {
    let (file_out, experiments) = selected(config, only)?;
    let out = out.or(file_out).unwrap_or_else(|| PathBuf::from("results"));
    let mut reports: Vec<RunReport> = Vec::new();
    for cfg in &experiments {
        eprintln!("{} {}", cfg.id, cfg.variant);
        let rep = run_experiment_with(cfg, |r| match &r.failure {
            Some(f) => eprintln!("  n={:<5} failed: {f}", r.n),
            None => eprintln!(
                "  n={:<5} error {} n_m {} ({:.1} s)",
                r.n,
                cell(r.l2_error, 3),
                r.nm_avg.map(|v| format!("{v:.2}")).unwrap_or_default(),
                r.walltime_s
            ),
        })?;
        reports.push(rep);
    }
    let (table, summary) = emit_results(&out, &reports)?;
    println!("{}", table.display());
    println!("{}", summary.display());
    Ok(())
}

fn rates(input: &Path) -> Result<()> {
    let rows = read_table(input).with_context(|| format!("reading {}", input.display()))?;
    let mut groups: BTreeMap<(String, String), Vec<_>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.experiment.to_string(), r.method.to_string()))
            .or_default()
            .push(r);
    }
    println!(
        "{:<17} {:<6} {:>6} {:>11} {:>7} {:>8}",
        "experiment", "method", "n", "l2_error", "rate", "nm_avg"
    );
    for ((exp, method), rows) in groups {
        for r in rows {
            println!(
                "{:<17} {:<6} {:>6} {:>11} {:>7} {:>8}",
                exp,
                method,
                r.n,
                cell(r.l2_error, 3),
                r.rate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
                r.nm_avg.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
            );
        }
    }
    Ok(())
}

fn snapshot(
    config: &Path,
    n: usize,
    time: Option<f64>,
    only: Option<ExperimentId>,
    out: &Path,
    per_cell: usize,
) -> Result<()> {
    let (_, experiments) = selected(config, only)?;
    std::fs::create_dir_all(out)?;
    for cfg in experiments {
        let mut problem = problem_for(&cfg)?;
        if let Some(t) = time {
            problem = problem.with_final_time(t)?;
        }
        let mut scheme = build_scheme(&cfg, &problem, n)?;
        let controller = StepController::for_scheme(scheme.as_ref(), problem.final_time)?;
        advance_to(scheme.as_mut(), &controller).with_context(|| format!("{} {} at n = {n}", cfg.id, cfg.variant))?;
        let (x, u) = sample_solution(scheme.as_ref(), per_cell);
        let snap = Snapshot {
            experiment: cfg.id,
            method: cfg.variant,
            n,
            time: problem.final_time,
            x,
            u,
        };
        let path = out.join(snap.file_name());
        write_snapshot(&path, &snap)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            experiment,
            out,
        } => run(&config, experiment, out),
        Command::Rates { input } => rates(&input),
        Command::Snapshot {
            config,
            n,
            time,
            experiment,
            out,
            per_cell,
        } => snapshot(&config, n, time, experiment, &out, per_cell),
    }
}
