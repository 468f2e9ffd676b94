//! The validation suite: every closed-form consistency identity and
//! metric-space property bundled into one pass/fail report.

use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{CheckResult, ExperimentReport};
use crate::analytics::kennedy::{dual_cdf, primary_tail};
use crate::analytics::{
    kennedy_cdf, kennedy_moment, kennedy_tail, phi_closed_form, phi_from_nu_brownian,
    phi_residual_with_density, quad, solve_phi_fixed_point, stable_tagged_exponent_mc,
};
use crate::error::Result;
use crate::fragmentation::{polyline_sub_level, OpenSet};
use crate::metrics::{chi, d_open};
use crate::rng::{CounterRng, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationSuite {
    All,
    Analytics,
    Metrics,
}

impl ValidationSuite {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "all" => ValidationSuite::All,
            "analytics" => ValidationSuite::Analytics,
            "metrics" => ValidationSuite::Metrics,
            other => {
                return Err(crate::error::Error::invalid(format!("unknown suite '{other}'")))
            }
        })
    }
}

pub fn run_validation_suite(suite: ValidationSuite, seed: Seed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let config = ExperimentConfig {
        experiment: ExperimentKind::Validation,
        beta: 2.0,
        trials: 1,
        grid_n: 2,
        t_list: Vec::new(),
        seed,
        out_path: None,
    };
    let mut report = ExperimentReport::new(config);
    if matches!(suite, ValidationSuite::All | ValidationSuite::Analytics) {
        analytics_checks(&mut report, seed)?;
    }
    if matches!(suite, ValidationSuite::All | ValidationSuite::Metrics) {
        metrics_checks(&mut report, seed);
    }
    report.timing.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn analytics_checks(report: &mut ExperimentReport, seed: Seed) -> Result<()> {
    // the two Laplace-exponent routes for the binary case
    for &q in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let nu = phi_from_nu_brownian(q);
        let closed: f64 = phi_closed_form(-0.5, q)?;
        report.checks.push(CheckResult::against_target(
            format!("phi_nu_vs_gamma_ratio_q_{q}"),
            nu,
            closed,
            1e-8,
            None,
        ));
    }

    // the stable dislocation measure against the Γ-ratio exponent
    for &beta in &[1.3, 1.5, 1.8] {
        for &q in &[1.0, 2.0] {
            let est = stable_tagged_exponent_mc(beta, q, 100_000, 1e-4, seed)?;
            let target: f64 = phi_closed_form(1.0 / beta - 1.0, q)?;
            report.checks.push(CheckResult::against_target_strict(
                format!("stable_nu_vs_gamma_ratio_beta_{beta}_q_{q}"),
                est.value,
                target,
                0.05 * target,
                est.std_err,
            ));
        }
    }

    // tail + CDF = 1 on a log grid
    let mut worst: f64 = 0.0;
    for i in -30..=15 {
        let t = 10f64.powf(i as f64 / 10.0);
        let s: f64 = kennedy_tail(t) + kennedy_cdf(t);
        worst = worst.max((s - 1.0).abs());
    }
    report.checks.push(CheckResult::upper_bound("max_tail_completeness_gap", worst, 1e-12));

    // size-biased expectations through the two theta-series routes
    for (fname, fval, dfval) in [
        ("identity", (|t: f64| t) as fn(f64) -> f64, (|_t: f64| 1.0) as fn(f64) -> f64),
        ("exp_neg", |t: f64| (-t).exp(), |t: f64| -(-t).exp()),
    ] {
        let weighted = |tail: fn(f64) -> f64, f: fn(f64) -> f64, df: fn(f64) -> f64| {
            // E[ζ f(ζ)] = ∫ (t f(t))' P(ζ > t) dt for f with t f(t) → 0 at 0
            quad::integrate(
                move |t: f64| (f(t) + t * df(t)) * tail(t),
                0.0,
                12.0,
                1e-12,
            )
            .value
        };
        let primary_route = |f: fn(f64) -> f64, df: fn(f64) -> f64| {
            weighted(|t| primary_tail(t).clamp(0.0, 1.0), f, df)
        };
        let dual_route = |f: fn(f64) -> f64, df: fn(f64) -> f64| {
            weighted(|t| (1.0 - dual_cdf(t)).clamp(0.0, 1.0), f, df)
        };
        let one = |_t: f64| 1.0;
        let zero = |_t: f64| 0.0;
        let side1 = primary_route(fval, dfval) / primary_route(one, zero);
        let side2 = dual_route(fval, dfval) / dual_route(one, zero);
        report.checks.push(CheckResult::against_target(
            format!("size_biased_expectation_two_routes_{fname}"),
            side1,
            side2,
            1e-8,
            None,
        ));
    }

    // E[ζ²] = π²/6 through the tail quadrature
    report.checks.push(CheckResult::against_target(
        "second_moment_of_the_maximum",
        kennedy_moment(2.0),
        std::f64::consts::PI * std::f64::consts::PI / 6.0,
        1e-6,
        None,
    ));

    // the fixed-point solver across the configured indices
    let grid: Vec<f64> = (0..64).map(|i| 10.0 * i as f64 / 63.0).collect();
    for &alpha in &[-0.45, -0.4, -0.34] {
        let table = solve_phi_fixed_point(alpha, &grid, 1e-9, 400)?;
        report.checks.push(CheckResult::upper_bound(
            format!("phi_residual_alpha_{alpha}"),
            table.residual,
            1e-6,
        ));
        report.checks.push(CheckResult::upper_bound(
            format!("phi_residual_doubled_quadrature_alpha_{alpha}"),
            phi_residual_with_density(&table, 2),
            1e-6,
        ));
        report.checks.push(CheckResult::against_target(
            format!("phi_at_zero_alpha_{alpha}"),
            table.values[0],
            1.0,
            0.0,
            None,
        ));
        let monotone = table.values.windows(2).all(|w| w[1] <= w[0] + 1e-14);
        report.checks.push(CheckResult::upper_bound(
            format!("phi_monotone_alpha_{alpha}"),
            if monotone { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    Ok(())
}

/// A random piecewise-linear function with f(0) = 0, growth to 5 at the
/// edges, knot values kept away from 1 so that level 1 is neither a local
/// maximum nor hit on a set of positive measure.
fn random_test_function(rng: &mut CounterRng) -> Vec<(f64, f64)> {
    let mut knots = vec![(-4.0, 5.0), (0.0, 0.0), (4.0, 5.0)];
    for _ in 0..10 {
        let x = rng.uniform() * 7.6 - 3.8;
        if x.abs() < 0.05 {
            continue;
        }
        let mut y = rng.uniform() * 2.5;
        if (y - 1.0).abs() < 0.06 {
            y += 0.12;
        }
        knots.push((x, y));
    }
    knots.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    knots.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-9);
    knots
}

fn perturbed(knots: &[(f64, f64)], eps: f64) -> Vec<(f64, f64)> {
    // smooth bounded perturbation resampled on a dense grid
    let g = |x: f64| (3.0 * x).sin() + 0.5 * (7.0 * x).cos();
    let eval = |x: f64| {
        let idx = knots.partition_point(|&(kx, _)| kx < x).clamp(1, knots.len() - 1);
        let (x0, y0) = knots[idx - 1];
        let (x1, y1) = knots[idx];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    const DENSE: usize = 4096;
    (0..=DENSE)
        .map(|i| {
            let x = -4.0 + 8.0 * i as f64 / DENSE as f64;
            (x, eval(x) + eps * g(x))
        })
        .collect()
}

fn metrics_checks(report: &mut ExperimentReport, seed: Seed) {
    let mut rng = CounterRng::stream(seed, 0x4d45_5452, 0);

    // χ is 1-Lipschitz, exactly on the piecewise-linear representation
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut pts: Vec<f64> = (0..6).map(|_| rng.uniform() * 8.0 - 4.0).collect();
        pts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let set =
            OpenSet::from_intervals(vec![(pts[0], pts[1]), (pts[2], pts[3]), (pts[4], pts[5])])
                .expect("sorted intervals");
        for _ in 0..1000 {
            let x = rng.uniform() * 10.0 - 5.0;
            let y = rng.uniform() * 10.0 - 5.0;
            let excess = (chi(&set, x) - chi(&set, y)).abs() - (x - y).abs();
            worst = worst.max(excess);
        }
    }
    report.checks.push(CheckResult::upper_bound("chi_lipschitz_max_excess", worst, 1e-12));

    // d_open: exact symmetry, triangle inequality within truncation bounds
    let rand_set = |rng: &mut CounterRng| {
        let mut pts: Vec<f64> = (0..6).map(|_| rng.uniform() * 10.0 - 5.0).collect();
        pts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        OpenSet::from_intervals(vec![(pts[0], pts[1]), (pts[2], pts[3]), (pts[4], pts[5])])
            .expect("sorted intervals")
    };
    let mut sym_gap: f64 = 0.0;
    let mut tri_excess: f64 = 0.0;
    for _ in 0..1000 {
        let a = rand_set(&mut rng);
        let b = rand_set(&mut rng);
        let c = rand_set(&mut rng);
        let (ab, tab) = d_open(&a, &b, 32);
        let (ba, _) = d_open(&b, &a, 32);
        sym_gap = sym_gap.max((ab - ba).abs());
        let (ac, tac) = d_open(&a, &c, 32);
        let (cb, tcb) = d_open(&c, &b, 32);
        tri_excess = tri_excess.max(ab - (ac + cb + tab + tac + tcb));
    }
    report.checks.push(CheckResult::upper_bound("d_open_symmetry_gap", sym_gap, 0.0));
    report.checks.push(CheckResult::upper_bound("d_open_triangle_excess", tri_excess, 0.0));

    // convergence transfer: sub-level sets of perturbed functions converge
    // in d_open, and their Lebesgue measures converge
    let mut final_d: f64 = 0.0;
    let mut envelope_violations = 0usize;
    let mut leb_violations = 0usize;
    for _family in 0..50 {
        let f = random_test_function(&mut rng);
        let base = polyline_sub_level(f.iter().copied(), 1.0);
        let leb_base = clipped_length(&base, 4.0);
        let mut ds = Vec::new();
        let mut lebs = Vec::new();
        for n in 1..=50 {
            let fx = perturbed(&f, 0.5 / n as f64);
            let set = polyline_sub_level(fx.iter().copied(), 1.0);
            ds.push(d_open(&base, &set, 32).0);
            lebs.push((clipped_length(&set, 4.0) - leb_base).abs());
        }
        let env = |from: usize| ds[from..].iter().cloned().fold(0.0f64, f64::max);
        if !(env(24) <= env(0) + 1e-12 && env(49) <= env(24) + 1e-12) {
            envelope_violations += 1;
        }
        final_d = final_d.max(ds[49]);
        // the measures converge, but a shallow crossing of the level makes
        // the rate slow; assert genuine decrease rather than a fixed gap
        if !(lebs[49] <= (0.4 * lebs[4]).max(0.05)) {
            leb_violations += 1;
        }
    }
    report.checks.push(CheckResult::upper_bound(
        "convergence_transfer_envelope_violations",
        envelope_violations as f64,
        0.0,
    ));
    report
        .checks
        .push(CheckResult::upper_bound("convergence_transfer_final_d_open", final_d, 0.05));
    report.checks.push(CheckResult::upper_bound(
        "lebesgue_convergence_violations",
        leb_violations as f64,
        0.0,
    ));
}

fn clipped_length(set: &OpenSet<f64>, k: f64) -> f64 {
    set.intervals()
        .iter()
        .map(|&(a, b)| (b.min(k) - a.max(-k)).max(0.0))
        .sum()
}
