//! Command-line front end: path sampling, level-set fragmentation,
//! Monte-Carlo experiments, the Φ solver and the validation suite.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use fragsim_core::analytics::solve_phi_fixed_point;
use fragsim_core::fragmentation::{level_set, ranked_lengths};
use fragsim_core::harness::{
    run_experiment, run_validation_suite, ExperimentConfig, ExperimentKind, ValidationSuite,
};
use fragsim_core::io::{read_path, write_path, SnapshotJson};
use fragsim_core::paths::{
    sample_brownian_excursion, sample_stable_excursion_sized, ExcursionSpec, SizeMode,
};
use fragsim_core::SampledPath64;

#[derive(Parser)]
#[command(name = "fragsim", version, about = "Stable fragmentation simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one excursion and write it as CSV + JSON sidecar
    Sample(SampleArgs),
    /// Compute level-set snapshots of a stored path
    Fragment(FragmentArgs),
    /// Run a Monte-Carlo experiment and write its JSON report
    Experiment(ExperimentArgs),
    /// Solve the last-fragment Laplace-transform fixed point
    PhiSolve(PhiArgs),
    /// Run consistency checks; exit code 0 iff everything passes
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// stability index in (1, 2]; 2 is the Brownian case
    #[arg(long)]
    beta: f64,
    /// number of grid intervals
    #[arg(long)]
    grid: usize,
    #[arg(long)]
    seed: u64,
    /// output base path; writes {out}.csv and {out}.json
    #[arg(long)]
    out: PathBuf,
    /// condition the tree on size ≥ grid instead of exactly grid
    /// (linear-time; what the large-grid experiments use)
    #[arg(long, default_value_t = false)]
    size_floor: bool,
}

#[derive(Args)]
struct FragmentArgs {
    /// base path of a stored path ({path}.csv / {path}.json)
    #[arg(long)]
    path: PathBuf,
    /// comma-separated ascending levels
    #[arg(long, value_delimiter = ',')]
    levels: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// extinction | last_fragment | total_mass | log_asymptotics | validation
    name: String,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// comma-separated descending levels
    #[arg(long = "t", value_delimiter = ',', default_value = "0.1,0.05,0.02")]
    t_list: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// grid intervals per path; defaults to a resolution that puts ~16
    /// cells under the smallest level's fragments
    #[arg(long)]
    grid: Option<usize>,
    /// report output path (JSON)
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write raw per-trial values as CSV
    #[arg(long)]
    raw_out: Option<PathBuf>,
}

#[derive(Args)]
struct PhiArgs {
    /// self-similarity index in (−1/2, 0)
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 64)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// output base path; writes {out}.csv (lambda,phi) and {out}.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// all | analytics | metrics
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn print_checks(checks: &[fragsim_core::harness::CheckResult]) {
    for c in checks {
        println!(
            "{} {} value={:.6e} target={:.6e} tol={:.2e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance
        );
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sample(a) => {
            let path: SampledPath64 = if a.beta == 2.0 && !a.size_floor {
                sample_brownian_excursion(a.grid, a.seed)?
            } else {
                let spec = ExcursionSpec { beta: a.beta, grid_n: a.grid, seed: a.seed };
                let mode = if a.size_floor { SizeMode::AtLeast } else { SizeMode::Exact };
                sample_stable_excursion_sized(&spec, mode)?
            };
            write_path(&path, Some(a.seed), &a.out)?;
            println!(
                "wrote {} and {} ({} grid points, max {:.6})",
                a.out.with_extension("csv").display(),
                a.out.with_extension("json").display(),
                path.values.len(),
                path.max_and_argmax().0
            );
            Ok(true)
        }
        Command::Fragment(a) => {
            if a.levels.is_empty() {
                bail!("at least one level is required");
            }
            if a.levels.windows(2).any(|w| w[1] < w[0]) {
                bail!("levels must be ascending");
            }
            let (path, _) =
                read_path(&a.path).with_context(|| format!("reading {}", a.path.display()))?;
            let snapshots: Vec<SnapshotJson> = a
                .levels
                .iter()
                .map(|&level| {
                    let set = level_set(&path, level)?;
                    let ranked = ranked_lengths(&set);
                    Ok(SnapshotJson::new(level, &set, &ranked))
                })
                .collect::<fragsim_core::Result<_>>()?;
            std::fs::write(&a.out, serde_json::to_string_pretty(&snapshots)?)?;
            println!("wrote {} snapshot(s) to {}", snapshots.len(), a.out.display());
            Ok(true)
        }
        Command::Experiment(a) => {
            let kind = ExperimentKind::parse(&a.name)?;
            let t_min = a.t_list.last().copied().unwrap_or(0.05);
            let grid =
                a.grid.unwrap_or_else(|| fragsim_core::harness::suggested_grid(a.beta, t_min));
            let config = ExperimentConfig {
                experiment: kind,
                beta: a.beta,
                trials: a.trials,
                grid_n: grid,
                t_list: a.t_list,
                seed: a.seed,
                out_path: a.out.as_ref().map(|p| p.display().to_string()),
            };
            let report = run_experiment(&config)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print_checks(&report.checks);
            if let Some(out) = &a.out {
                std::fs::write(out, report.to_json()?)?;
                println!("report written to {}", out.display());
            }
            if let Some(raw) = &a.raw_out {
                std::fs::write(raw, report.raw.to_csv())?;
                println!("raw samples written to {}", raw.display());
            }
            println!(
                "{} checks, {} in {} ms",
                report.checks.len(),
                if report.passed() { "all passed" } else { "FAILURES PRESENT" },
                report.timing.wall_time_ms
            );
            Ok(report.passed())
        }
        Command::PhiSolve(a) => {
            if a.grid_points < 2 {
                bail!("need at least two grid points");
            }
            let grid: Vec<f64> = (0..a.grid_points)
                .map(|i| a.lambda_max * i as f64 / (a.grid_points - 1) as f64)
                .collect();
            let table = solve_phi_fixed_point(a.alpha, &grid, a.tol, 500)?;
            println!(
                "alpha = {}, residual = {:.3e}, iterations = {}",
                table.alpha, table.residual, table.iterations
            );
            if let Some(out) = &a.out {
                let mut csv = String::from("lambda,phi\n");
                for (l, v) in table.lambdas.iter().zip(&table.values) {
                    csv.push_str(&format!("{l:.16e},{v:.16e}\n"));
                }
                std::fs::write(out.with_extension("csv"), csv)?;
                let summary = serde_json::json!({
                    "alpha": table.alpha,
                    "residual": table.residual,
                    "iterations": table.iterations,
                    "mean": table.mean,
                });
                std::fs::write(
                    out.with_extension("json"),
                    serde_json::to_string_pretty(&summary)?,
                )?;
                println!("wrote {}.csv and {}.json", out.display(), out.display());
            }
            Ok(true)
        }
        Command::Verify(a) => {
            let suite = ValidationSuite::parse(&a.suite)?;
            let report = run_validation_suite(suite, a.seed)?;
            print_checks(&report.checks);
            println!(
                "{} checks, {} in {} ms",
                report.checks.len(),
                if report.passed() { "all passed" } else { "FAILURES PRESENT" },
                report.timing.wall_time_ms
            );
            Ok(report.passed())
        }
    }
}
