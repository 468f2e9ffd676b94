//! The near-extinction Monte-Carlo experiments.
//!
//! Every trial derives its generator from (seed, stream, trial index),
//! results are collected in trial order, and aggregation never touches
//! unordered containers, so reports are identical for any worker count.

use rayon::prelude::*;
use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{CheckResult, ExperimentReport, LevelSummary, Stat};
use crate::analytics::{
    kennedy, laplace_last_fragment_brownian, laplace_total_mass_brownian,
};
use crate::error::{Error, Result};
use crate::fragmentation::{level_set, ranked_lengths, RankedMasses};
use crate::limits::brownian::{sample_limit_masses_brownian, BROWNIAN_WALKER_DT};
use crate::paths::brownian::{bridge_touches_level, refine_excursion_max, sample_excursion_with};
use crate::paths::stable::{sample_stable_with, SizeMode};
use crate::paths::SampledPath;
use crate::rng::CounterRng;
use crate::stats;

const STREAM_TRIAL: u64 = 0x4558_5031;
const STREAM_REFERENCE: u64 = 0x4558_5032;
const STREAM_REFINE: u64 = 0x4558_5033;
const STREAM_DIPS: u64 = 0x4558_5034;

/// Dispatch by configured kind. Validation runs its own suite.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::Extinction => run_extinction_experiment(config),
        ExperimentKind::LastFragment => run_last_fragment_experiment(config),
        ExperimentKind::TotalMass => run_total_mass_experiment(config),
        ExperimentKind::LogAsymptotics => run_log_asymptotics(config),
        ExperimentKind::Validation => {
            super::validation::run_validation_suite(super::validation::ValidationSuite::All, config.seed)
        }
    }
}

/// One trial path together with its extinction data.
///
/// For β = 2 the grid path discretizes a continuum excursion whose true
/// maximum hides between grid points; the conditionally-exact cell-bridge
/// refinement recovers it (see `refine_excursion_max` — without it the
/// 1/t amplification in the rescaled laws buries the tolerances). Tree
/// paths are their own exact objects, so their grid maximum is the
/// extinction time.
fn sample_trial_excursion(config: &ExperimentConfig, trial: usize) -> (SampledPath<f64>, f64, f64) {
    let mut rng = CounterRng::stream(config.seed, STREAM_TRIAL, trial as u64);
    if config.beta == 2.0 {
        let path = sample_excursion_with(config.grid_n, &mut rng).expect("valid grid");
        let (_, x_star) = path.max_and_argmax();
        let mut refine_rng = CounterRng::stream(config.seed, STREAM_REFINE, trial as u64);
        let zeta = refine_excursion_max(&path, &mut refine_rng);
        (path, zeta, x_star)
    } else {
        let path = sample_stable_with(config.beta, config.grid_n, SizeMode::AtLeast, &mut rng)
            .expect("valid parameters");
        let (zeta, x_star) = path.max_and_argmax();
        (path, zeta, x_star)
    }
}

/// Fragment data of a Brownian-case path at one level, with sub-cell
/// dips below the level sampled from the refinement stream: the grid
/// interpolant glues over every excursion below the level shorter than a
/// cell, and near the extinction time the rescaling amplifies that glue
/// by 1/t. Returns the ranked masses and the length of the component
/// containing `x_star` (0 if the dip sampling cut it away).
fn refined_fragments_at(
    path: &SampledPath<f64>,
    level: f64,
    x_star: f64,
    refine: &mut CounterRng,
) -> (Vec<f64>, f64) {
    let dt = path.dt;
    let v = &path.values;
    let mut lengths: Vec<f64> = Vec::new();
    let mut star_len = 0.0f64;
    let mut open_at: Option<f64> = None;
    let close = |a: f64, b: f64, lengths: &mut Vec<f64>, star_len: &mut f64| {
        if b > a {
            lengths.push(b - a);
            if x_star > a && x_star < b {
                *star_len = b - a;
            }
        }
    };
    for i in 0..v.len() - 1 {
        let (xa, xb) = (dt * i as f64, dt * (i + 1) as f64);
        let (va, vb) = (v[i], v[i + 1]);
        match open_at {
            Some(a) => {
                if vb <= level {
                    let cross = xa + (xb - xa) * (va - level) / (va - vb);
                    close(a, cross, &mut lengths, &mut star_len);
                    open_at = None;
                } else if va > level && bridge_touches_level(va, vb, level, dt, refine) {
                    let mid = 0.5 * (xa + xb);
                    close(a, mid, &mut lengths, &mut star_len);
                    open_at = Some(mid);
                }
            }
            None => {
                if vb > level {
                    let cross = if va >= level {
                        xa
                    } else {
                        xa + (xb - xa) * (level - va) / (vb - va)
                    };
                    open_at = Some(cross);
                }
            }
        }
    }
    if let Some(a) = open_at {
        close(a, dt * (v.len() - 1) as f64, &mut lengths, &mut star_len);
    }
    lengths.sort_unstable_by(|p, q| q.partial_cmp(p).unwrap());
    (lengths, star_len)
}

/// Rescaled top masses t^{1/α} F_k((ζ−t)⁺) against the limit object.
pub fn run_extinction_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::Extinction {
        return Err(Error::invalid("config is not an extinction experiment"));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new(config.clone());
    let alpha = config.alpha();
    let inv_alpha = 1.0 / alpha;

    const TOP_K: usize = 3;
    // per trial, per level: top-3 rescaled masses
    let per_trial: Vec<Vec<[f64; TOP_K]>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (path, zeta, x_star) = sample_trial_excursion(config, trial);
            let mut refine = CounterRng::stream(config.seed, STREAM_DIPS, trial as u64);
            config
                .t_list
                .iter()
                .map(|&t| {
                    let level = (zeta - t).max(0.0);
                    let scale = t.powf(inv_alpha);
                    if config.beta == 2.0 {
                        let (lengths, _) =
                            refined_fragments_at(&path, level, x_star, &mut refine);
                        let get = |k: usize| lengths.get(k).copied().unwrap_or(0.0);
                        [get(0) * scale, get(1) * scale, get(2) * scale]
                    } else {
                        let ranked =
                            ranked_lengths(&level_set(&path, level).expect("valid level"));
                        [
                            ranked.get(0) * scale,
                            ranked.get(1) * scale,
                            ranked.get(2) * scale,
                        ]
                    }
                })
                .collect()
        })
        .collect();

    // reference: the limit fragmentation's top masses (Brownian route)
    let reference: Option<Vec<[f64; TOP_K]>> = (config.beta == 2.0).then(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let lm = sample_limit_masses_brownian(
                    CounterRng::stream(config.seed, STREAM_REFERENCE, trial as u64).next_raw(),
                    2.0 * BROWNIAN_WALKER_DT,
                );
                [lm.masses.get(0), lm.masses.get(1), lm.masses.get(2)]
            })
            .collect()
    });

    let ref_top1: Option<Vec<f64>> = reference.as_ref().map(|r| r.iter().map(|m| m[0]).collect());
    let ref_mean: Option<RankedMasses<f64>> = reference.as_ref().map(|r| {
        let n = r.len() as f64;
        RankedMasses::from_lengths(
            (0..TOP_K).map(|k| r.iter().map(|m| m[k]).sum::<f64>() / n).collect(),
        )
    });

    let mut ks_per_t = Vec::new();
    for (ti, &t) in config.t_list.iter().enumerate() {
        let top: Vec<[f64; TOP_K]> = per_trial.iter().map(|v| v[ti]).collect();
        let top1: Vec<f64> = top.iter().map(|m| m[0]).collect();
        let mut stats_block = vec![
            Stat::from_samples("rescaled_top1", &top1),
            Stat::from_samples("rescaled_top2", &top.iter().map(|m| m[1]).collect::<Vec<_>>()),
            Stat::from_samples("rescaled_top3", &top.iter().map(|m| m[2]).collect::<Vec<_>>()),
        ];
        report
            .raw
            .columns
            .push((format!("rescaled_top1_t_{t}"), top1.clone()));
        if let (Some(r1), Some(rm)) = (&ref_top1, &ref_mean) {
            let ks = stats::ks_statistic_two_sample(&top1, r1);
            ks_per_t.push(ks);
            report.checks.push(CheckResult::upper_bound(
                format!("ks_rescaled_top1_vs_limit_t_{t}"),
                ks,
                0.06,
            ));
            let dr: Vec<f64> = top
                .iter()
                .map(|m| {
                    let rm_trial = RankedMasses::from_lengths(m.to_vec());
                    crate::metrics::d_ranked(&rm_trial, rm)
                })
                .collect();
            stats_block.push(Stat::from_samples("d_ranked_to_limit_mean", &dr));
        }
        report.per_t.push(LevelSummary {
            t,
            n_effective: config.trials,
            excluded: 0,
            stats: stats_block,
        });
    }

    if let Some(r1) = &ref_top1 {
        report.raw.columns.push(("limit_top1".into(), r1.clone()));
    }
    if config.beta == 2.0 {
        // convergence in t: the KS distance must not grow as t shrinks.
        // At the noise floor a difference of two independent KS statistics
        // fluctuates by ~2/√n, so the band widens for small runs.
        let band = 0.02f64.max(2.04 / (config.trials as f64).sqrt());
        for w in ks_per_t.windows(2) {
            report.checks.push(CheckResult::upper_bound(
                "ks_trend_nonincreasing_with_noise_band",
                w[1] - w[0],
                band,
            ));
        }
    } else {
        // no tractable absolute reference under truncation: check the
        // rescaled law is stable across the configured levels instead
        for ti in 0..config.t_list.len().saturating_sub(1) {
            let a: Vec<f64> = per_trial.iter().map(|v| v[ti][0]).collect();
            let b: Vec<f64> = per_trial.iter().map(|v| v[ti + 1][0]).collect();
            let ks = stats::ks_statistic_two_sample(&a, &b);
            report.checks.push(CheckResult::upper_bound(
                format!(
                    "ks_self_consistency_top1_t_{}_vs_{}",
                    config.t_list[ti],
                    config.t_list[ti + 1]
                ),
                ks,
                0.08,
            ));
        }
    }

    report.timing.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// The last fragment under the size-biased limit law (Brownian case).
pub fn run_last_fragment_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::LastFragment {
        return Err(Error::invalid("config is not a last-fragment experiment"));
    }
    if config.beta != 2.0 {
        return Err(Error::invalid(
            "the last-fragment comparison uses the closed-form law, which needs beta = 2",
        ));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new(config.clone());

    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (path, zeta, x_star) = sample_trial_excursion(config, trial);
            let mut refine = CounterRng::stream(config.seed, STREAM_DIPS, trial as u64);
            config
                .t_list
                .iter()
                .map(|&t| {
                    let level = (zeta - t).max(0.0);
                    if level <= 0.0 {
                        return 1.0;
                    }
                    let (_, star_len) = refined_fragments_at(&path, level, x_star, &mut refine);
                    star_len
                })
                .collect()
        })
        .collect();

    let reference = kennedy::size_biased_batch(1.0, config.trials, config.seed ^ 0x5a5a)?;

    let t_min = *config.t_list.last().unwrap();
    for (ti, &t) in config.t_list.iter().enumerate() {
        let f_star: Vec<f64> = per_trial.iter().map(|v| v[ti]).collect();
        let rescaled_root: Vec<f64> = f_star.iter().map(|&f| t / f.sqrt()).collect();
        let z: Vec<f64> = f_star.iter().map(|&f| f / (t * t)).collect();
        report
            .raw
            .columns
            .push((format!("t_f_star_inv_sqrt_t_{t}"), rescaled_root.clone()));
        report.raw.columns.push((format!("f_star_over_t_sq_t_{t}"), z.clone()));
        let mut stats_block = vec![
            Stat::from_samples("t_times_f_star_inv_sqrt", &rescaled_root),
            Stat::from_samples("f_star_over_t_sq", &z),
        ];
        for &lambda in &[0.5f64, 1.0, 2.0] {
            let e: Vec<f64> = z.iter().map(|&x| (-lambda * x).exp()).collect();
            let s = Stat::from_samples(format!("laplace_f_star_lambda_{lambda}"), &e);
            let target: f64 = laplace_last_fragment_brownian(lambda);
            let tol = if lambda == 1.0 { 0.02 } else { 0.03 };
            if t == t_min {
                report.checks.push(CheckResult::against_target(
                    format!("laplace_f_star_lambda_{lambda}_t_{t}"),
                    s.mean,
                    target,
                    tol,
                    Some(s.std_err),
                ));
            }
            stats_block.push(s);
        }
        if t == t_min {
            let ks = stats::ks_statistic_two_sample(&rescaled_root, &reference);
            report.checks.push(CheckResult::upper_bound(
                format!("ks_t_f_star_inv_sqrt_vs_size_biased_t_{t}"),
                ks,
                0.05,
            ));
            let m = stats::mean_std_err(&z);
            report.checks.push(CheckResult::against_target(
                format!("mean_f_star_over_t_sq_t_{t}"),
                m.mean,
                2.0 / 3.0,
                0.1,
                Some(m.std_err),
            ));
        }
        report.per_t.push(LevelSummary {
            t,
            n_effective: config.trials,
            excluded: 0,
            stats: stats_block,
        });
    }

    report.timing.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Total rescaled mass against the closed-form Laplace transform.
pub fn run_total_mass_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::TotalMass {
        return Err(Error::invalid("config is not a total-mass experiment"));
    }
    if config.beta != 2.0 {
        return Err(Error::invalid("the total-mass closed form needs beta = 2"));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new(config.clone());

    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (path, zeta, _) = sample_trial_excursion(config, trial);
            config
                .t_list
                .iter()
                .map(|&t| crate::fragmentation::measure_above(&path, (zeta - t).max(0.0)))
                .collect()
        })
        .collect();

    let t_min = *config.t_list.last().unwrap();
    for (ti, &t) in config.t_list.iter().enumerate() {
        let z: Vec<f64> = per_trial.iter().map(|v| v[ti] / (t * t)).collect();
        report.raw.columns.push((format!("mass_over_t_sq_t_{t}"), z.clone()));
        let mut stats_block = vec![Stat::from_samples("mass_over_t_sq", &z)];
        let lambdas = [0.0f64, 0.5, 1.0, 2.0];
        let mut estimates = Vec::new();
        for &lambda in &lambdas {
            let e: Vec<f64> = z.iter().map(|&x| (-lambda * x).exp()).collect();
            let s = Stat::from_samples(format!("laplace_mass_lambda_{lambda}"), &e);
            estimates.push(s.mean);
            if t == t_min && lambda > 0.0 {
                let target: f64 = laplace_total_mass_brownian(lambda);
                let tol = if lambda == 1.0 { 0.02 } else { 0.03 };
                report.checks.push(CheckResult::against_target(
                    format!("laplace_mass_lambda_{lambda}_t_{t}"),
                    s.mean,
                    target,
                    tol,
                    Some(s.std_err),
                ));
            }
            stats_block.push(s);
        }
        if t == t_min {
            report.checks.push(CheckResult::against_target(
                format!("laplace_mass_lambda_0_t_{t}"),
                estimates[0],
                1.0,
                1e-12,
                None,
            ));
            let decreasing = estimates.windows(2).all(|w| w[1] < w[0]);
            report.checks.push(CheckResult::upper_bound(
                format!("laplace_mass_decreasing_in_lambda_t_{t}"),
                if decreasing { 0.0 } else { 1.0 },
                0.0,
            ));
        }
        report.per_t.push(LevelSummary {
            t,
            n_effective: config.trials,
            excluded: 0,
            stats: stats_block,
        });
    }

    report.timing.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// log F((ζ−t)⁺) / log t for the largest and last fragments.
pub fn run_log_asymptotics(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::LogAsymptotics {
        return Err(Error::invalid("config is not a log-asymptotics experiment"));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new(config.clone());
    let target = config.beta / (config.beta - 1.0);

    struct PathRow {
        ratios: Vec<Option<(f64, f64)>>, // (largest, last) per t; None if t ≥ ζ
        order_violations: usize,
    }

    let rows: Vec<PathRow> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (path, zeta, x_star) = sample_trial_excursion(config, trial);
            let mut order_violations = 0;
            let ratios = config
                .t_list
                .iter()
                .map(|&t| {
                    if t >= zeta {
                        return None;
                    }
                    let level = zeta - t;
                    let set = level_set(&path, level).expect("valid level");
                    let f1 = ranked_lengths(&set).get(0);
                    let f_star = set
                        .component_containing(x_star)
                        .map(|(a, b)| b - a)
                        .unwrap_or(0.0);
                    if f_star > f1 + 1e-12 {
                        order_violations += 1;
                    }
                    if f1 <= 0.0 || f_star <= 0.0 {
                        return None;
                    }
                    Some((f1.ln() / t.ln(), f_star.ln() / t.ln()))
                })
                .collect();
            PathRow { ratios, order_violations }
        })
        .collect();

    let total_violations: usize = rows.iter().map(|r| r.order_violations).sum();
    report.checks.push(CheckResult::upper_bound(
        "last_fragment_never_exceeds_largest",
        total_violations as f64,
        0.0,
    ));

    let band = match config.beta {
        b if b == 2.0 => (1.7, 2.3),
        b if b == 1.5 => (2.4, 3.6),
        _ => (target * 0.8, target * 1.2),
    };
    for (ti, &t) in config.t_list.iter().enumerate() {
        let mut largest = Vec::new();
        let mut last = Vec::new();
        let mut excluded = 0usize;
        for row in &rows {
            match row.ratios[ti] {
                Some((a, b)) => {
                    largest.push(a);
                    last.push(b);
                }
                None => excluded += 1,
            }
        }
        if largest.len() < 2 {
            report.per_t.push(LevelSummary { t, n_effective: 0, excluded, stats: vec![] });
            continue;
        }
        report
            .raw
            .columns
            .push((format!("log_ratio_largest_t_{t}"), largest.clone()));
        report.raw.columns.push((format!("log_ratio_last_t_{t}"), last.clone()));
        let med = stats::median(&largest);
        report.checks.push(CheckResult::against_target(
            format!("median_log_ratio_largest_t_{t}"),
            med,
            target,
            (band.1 - band.0) / 2.0,
            None,
        ));
        report.per_t.push(LevelSummary {
            t,
            n_effective: largest.len(),
            excluded,
            stats: vec![
                Stat::from_samples("log_ratio_largest", &largest),
                Stat::from_samples("log_ratio_last", &last),
            ],
        });
    }

    report.timing.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mini(kind: ExperimentKind, beta: f64, t_list: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            experiment: kind,
            beta,
            trials: 60,
            grid_n: 2048,
            t_list,
            seed: 7,
            out_path: None,
        }
    }

    #[test]
    fn extinction_runs_and_is_deterministic() {
        let config = mini(ExperimentKind::Extinction, 2.0, vec![0.3, 0.2]);
        let a = run_extinction_experiment(&config).unwrap();
        let b = run_extinction_experiment(&config).unwrap();
        assert_eq!(a.canonical_bytes().unwrap(), b.canonical_bytes().unwrap());
        assert_eq!(a.per_t.len(), 2);
        assert!(!a.checks.is_empty());
    }

    #[test]
    fn determinism_across_worker_counts() {
        let config = mini(ExperimentKind::Extinction, 2.0, vec![0.3]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let two = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let a = one.install(|| run_extinction_experiment(&config)).unwrap();
        let b = two.install(|| run_extinction_experiment(&config)).unwrap();
        assert_eq!(a.canonical_bytes().unwrap(), b.canonical_bytes().unwrap());
    }

    #[test]
    fn dispatch_and_validation_of_kinds() {
        let config = mini(ExperimentKind::LastFragment, 1.5, vec![0.1]);
        assert!(run_last_fragment_experiment(&config).is_err(), "needs beta = 2");
        let config = mini(ExperimentKind::Extinction, 2.0, vec![0.1]);
        assert!(run_last_fragment_experiment(&config).is_err(), "kind mismatch");
    }

    #[test]
    fn log_asymptotics_smoke() {
        let mut config = mini(ExperimentKind::LogAsymptotics, 2.0, vec![0.05]);
        config.grid_n = 16_384;
        config.trials = 40;
        let r = run_log_asymptotics(&config).unwrap();
        assert!(r
            .checks
            .iter()
            .any(|c| c.name == "last_fragment_never_exceeds_largest" && c.pass));
        let med = &r.per_t[0].stats[0];
        assert!(med.median > 1.0 && med.median < 3.5, "ratio median {}", med.median);
    }
}
