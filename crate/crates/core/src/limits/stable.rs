//! The stable limit function built by Poisson gluing: atoms (v, r, t)
//! carry sub-excursions conditioned to stay below their level t, hung
//! upside down left and right of the origin, with local time r split
//! v : (1 − v) between the sides.
//!
//! The construction is truncated: atoms above the level cap or below the
//! local-time floor are dropped, and sub-excursions shorter than a fixed
//! floor enter only through their exact mean length. Conditioning a
//! sub-excursion's maximum below t uses the empirical distribution of
//! the unit-excursion maximum (cached per β): lifetimes are thinned by
//! that acceptance and shapes are redrawn until they clear the cap.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::{EtaCurve, EtaInterp, HInfinitySample, Truncation};
use crate::analytics::special::{gamma, upper_gamma_frac};
use crate::error::{Error, Result};
use crate::paths::stable::{sample_stable_with, SizeMode};
use crate::paths::{PathKind, PathMeta, SampledPath};
use crate::rng::{CounterRng, Seed};
use crate::scalar::Real;

pub(crate) const STREAM_HINF_ST: u64 = 0x4849_5354;
const STREAM_MAXCDF: u64 = 0x4d43;

/// lifetime floor for explicitly represented sub-excursions
const SIGMA_MIN: f64 = 1e-6;

/// An atom of the driving Poisson measure.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PoissonAtom {
    /// left/right local-time split in [0, 1]
    pub v: f64,
    /// total local time > 0
    pub r: f64,
    /// level > 0
    pub t: f64,
}

/// Intensity constants for a given β.
struct StableIntensity {
    beta: f64,
    c_i: f64,
    c_beta: f64,
}

impl StableIntensity {
    fn new(beta: f64) -> Self {
        StableIntensity {
            beta,
            c_i: beta * (beta - 1.0) / gamma::<f64>(2.0 - beta),
            c_beta: (beta - 1.0).powf(1.0 / (1.0 - beta)),
        }
    }

    fn b(&self, t: f64) -> f64 {
        self.c_beta * t.powf(1.0 / (1.0 - self.beta))
    }

    /// level marginal after integrating out v and r ≥ r_min
    fn level_density(&self, t: f64, r_min: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let b = self.b(t);
        let x = b * r_min;
        if x > 650.0 {
            return 0.0;
        }
        self.c_i * b.powf(self.beta - 1.0) * upper_gamma_frac(1.0 - self.beta, x)
    }
}

/// Local-time floor under which an atom is dropped, chosen so the
/// expected number of dropped sub-excursions longer than the working
/// grid resolution stays below 0.01 per sample. The bound is floored so
/// that the expected atom count stays near 2·10⁴ — the dropped-excursion
/// rule alone can demand absurdly small floors when 1/(2−β) is large.
pub fn default_r_min(beta: f64, m_cap: f64, grid_n: usize) -> f64 {
    let h_est = m_cap.powf(beta / (beta - 1.0)) / grid_n as f64;
    let lambda_n = h_est.powf(-1.0 / beta) / gamma::<f64>(1.0 - 1.0 / beta);
    let c_i = beta * (beta - 1.0) / gamma::<f64>(2.0 - beta);
    let dropped_rule = (0.01 * (2.0 - beta) / (lambda_n * c_i * m_cap)).powf(1.0 / (2.0 - beta));
    let atom_budget =
        (c_i * m_cap / ((beta - 1.0) * 20_000.0)).powf(1.0 / (beta - 1.0));
    dropped_rule.max(atom_budget)
}

/// Empirical CDF of the unit-excursion maximum, cached per β.
///
/// The raw tree-route maxima carry an O(n^{1/β−1}) finite-size deficit,
/// which would leak an O(1) scale error into every glued length. The
/// table is therefore scale-anchored to the exact level density of the
/// excursion-measure maximum: N(Hmax ∈ dm)/dm at m = 1 equals
/// (β−1)^{β/(1−β)}, which forces E[M^{1/(β−1)}] =
/// (β−1)^{1+β/(1−β)} Γ(1−1/β); the table is multiplied by the constant
/// that matches that moment.
struct MaxCdf {
    sorted: Vec<f64>,
    /// the scale anchor applied to the raw maxima
    scale: f64,
}

impl MaxCdf {
    fn eval(&self, y: f64) -> f64 {
        let idx = self.sorted.partition_point(|&m| m <= y);
        idx as f64 / self.sorted.len() as f64
    }
}

fn max_cdf(beta: f64) -> Arc<MaxCdf> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<MaxCdf>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = beta.to_bits();
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return c.clone();
    }
    const TRIALS: usize = 20_000;
    const GRID: usize = 1024;
    let mut sorted: Vec<f64> = (0..TRIALS)
        .map(|s| {
            let mut rng = CounterRng::stream(0x4D43_0001, STREAM_MAXCDF, s as u64);
            let p: SampledPath<f64> =
                sample_stable_with(beta, GRID, SizeMode::AtLeast, &mut rng)
                    .expect("unit excursion for the max table");
            p.max_and_argmax().0
        })
        .collect();
    let p = 1.0 / (beta - 1.0);
    let emp_moment = sorted.iter().map(|m| m.powf(p)).sum::<f64>() / sorted.len() as f64;
    let required = (beta - 1.0).powf(1.0 + beta / (1.0 - beta)) * gamma::<f64>(1.0 - 1.0 / beta);
    let scale = (required / emp_moment).powf(beta - 1.0);
    for m in sorted.iter_mut() {
        *m *= scale;
    }
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let arc = Arc::new(MaxCdf { sorted, scale });
    cache.lock().unwrap().insert(key, arc.clone());
    arc
}

fn validate(beta: f64, m_cap: f64, r_min: f64) -> Result<()> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(Error::invalid(format!("beta must lie in (1, 2), got {beta}")));
    }
    if !(m_cap > 0.0) {
        return Err(Error::invalid("m_cap must be positive"));
    }
    if !(r_min > 0.0) {
        return Err(Error::invalid("r_min must be positive"));
    }
    Ok(())
}

fn draw_atoms(
    intensity: &StableIntensity,
    m_cap: f64,
    r_min: f64,
    rng: &mut CounterRng,
) -> Vec<PoissonAtom> {
    // tabulated level marginal for inverse-CDF sampling of t
    const TABLE: usize = 2048;
    let mut cum = Vec::with_capacity(TABLE + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    let dt = m_cap / TABLE as f64;
    let mut prev = intensity.level_density(0.0, r_min);
    for i in 1..=TABLE {
        let cur = intensity.level_density(i as f64 * dt, r_min);
        acc += 0.5 * (prev + cur) * dt;
        cum.push(acc);
        prev = cur;
    }
    let total = acc;
    let n_atoms = rng.poisson(total);
    let mut atoms = Vec::with_capacity(n_atoms as usize);
    for _ in 0..n_atoms {
        let target = rng.uniform() * total;
        let idx = cum.partition_point(|&c| c < target).max(1);
        let frac = (target - cum[idx - 1]) / (cum[idx] - cum[idx - 1]).max(1e-300);
        let t = dt * (idx as f64 - 1.0 + frac);
        let b = intensity.b(t);
        // r from the pure power-law tail on [r_min, ∞), tempered by e^{−br}
        let mut r = r_min;
        for _ in 0..1_000_000 {
            let proposal = r_min * rng.uniform_open().powf(-1.0 / (intensity.beta - 1.0));
            if rng.uniform() < (-b * (proposal - r_min)).exp() {
                r = proposal;
                break;
            }
        }
        atoms.push(PoissonAtom { v: rng.uniform(), r, t });
    }
    atoms.sort_unstable_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    atoms
}

struct SideJumps {
    /// lifetimes of explicitly represented sub-excursions, in draw order
    sigmas: Vec<f64>,
    /// spacer length from the sub-floor lifetimes (exact mean)
    spacer: f64,
}

impl SideJumps {
    fn total(&self) -> f64 {
        self.spacer + self.sigmas.iter().sum::<f64>()
    }
}

/// Poisson draws of the sub-excursion lifetimes of one atom side:
/// rate a per unit level of N(σ ∈ ·), thinned by the conditioned-maximum
/// acceptance G(σ^α t).
fn draw_side_jumps(
    beta: f64,
    alpha: f64,
    local_time: f64,
    level: f64,
    gmax: &MaxCdf,
    rng: &mut CounterRng,
    keep_shapes: bool,
) -> SideJumps {
    let g1 = gamma::<f64>(1.0 - 1.0 / beta);
    let rate = local_time * SIGMA_MIN.powf(-1.0 / beta) / g1;
    let n = rng.poisson(rate);
    let mut sigmas = Vec::new();
    for _ in 0..n {
        let sigma = SIGMA_MIN * rng.uniform_open().powf(-beta);
        let accept = gmax.eval(level * sigma.powf(alpha));
        if rng.uniform() < accept {
            sigmas.push(sigma);
        }
    }
    if !keep_shapes {
        // only the total matters; keep the vector lean
        let total: f64 = sigmas.iter().sum();
        sigmas.clear();
        sigmas.push(total);
    }
    let spacer = local_time * SIGMA_MIN.powf(1.0 - 1.0 / beta) / ((beta - 1.0) * g1);
    SideJumps { sigmas, spacer }
}

/// η curves of a truncated sample, without building the path; this is
/// what the level-passage experiments use.
#[derive(Clone, Debug)]
pub struct StableEtaSample {
    pub eta_minus: EtaCurve<f64>,
    pub eta_plus: EtaCurve<f64>,
    pub n_atoms: usize,
    pub truncation: Truncation,
}

impl StableEtaSample {
    pub fn eta_total(&self, m: f64) -> Option<f64> {
        Some(self.eta_minus.eval(m)? + self.eta_plus.eval(m)?)
    }
}

pub fn sample_stable_eta_curves(
    beta: f64,
    m_cap: f64,
    r_min: f64,
    seed: Seed,
) -> Result<StableEtaSample> {
    let mut rng = CounterRng::stream(seed, STREAM_HINF_ST, 0);
    sample_eta_with(beta, m_cap, r_min, &mut rng)
}

pub(crate) fn sample_eta_with(
    beta: f64,
    m_cap: f64,
    r_min: f64,
    rng: &mut CounterRng,
) -> Result<StableEtaSample> {
    validate(beta, m_cap, r_min)?;
    let alpha = 1.0 / beta - 1.0;
    let intensity = StableIntensity::new(beta);
    let gmax = max_cdf(beta);
    let atoms = draw_atoms(&intensity, m_cap, r_min, rng);
    let mut plus_knots = Vec::with_capacity(atoms.len());
    let mut minus_knots = Vec::with_capacity(atoms.len());
    let (mut acc_plus, mut acc_minus) = (0.0f64, 0.0f64);
    for atom in &atoms {
        let plus =
            draw_side_jumps(beta, alpha, (1.0 - atom.v) * atom.r, atom.t, &gmax, rng, false);
        let minus = draw_side_jumps(beta, alpha, atom.v * atom.r, atom.t, &gmax, rng, false);
        acc_plus += plus.total();
        acc_minus += minus.total();
        plus_knots.push((atom.t, acc_plus));
        minus_knots.push((atom.t, acc_minus));
    }
    if atoms.is_empty() {
        return Err(Error::DegenerateSample("no atoms survived the truncation".into()));
    }
    // make the curves queryable on all of (0, m_cap]
    if plus_knots.last().map(|&(t, _)| t) != Some(m_cap) {
        plus_knots.push((m_cap, acc_plus));
        minus_knots.push((m_cap, acc_minus));
    }
    Ok(StableEtaSample {
        eta_minus: EtaCurve { interp: EtaInterp::Step, knots: minus_knots },
        eta_plus: EtaCurve { interp: EtaInterp::Step, knots: plus_knots },
        n_atoms: atoms.len(),
        truncation: Truncation { m_cap, r_min },
    })
}

/// Full sampler: glues conditioned sub-excursion shapes onto a uniform
/// grid over [−η⁻(cap), η⁺(cap)].
pub fn sample_h_infinity_stable<T: Real>(
    beta: f64,
    m_cap: f64,
    r_min: f64,
    grid_n: usize,
    seed: Seed,
) -> Result<HInfinitySample<T>> {
    validate(beta, m_cap, r_min)?;
    if grid_n < 16 {
        return Err(Error::invalid("grid_n must be at least 16"));
    }
    let alpha = 1.0 / beta - 1.0;
    let intensity = StableIntensity::new(beta);
    let gmax = max_cdf(beta);
    let mut rng = CounterRng::stream(seed, STREAM_HINF_ST, 0);
    let atoms = draw_atoms(&intensity, m_cap, r_min, &mut rng);
    if atoms.is_empty() {
        return Err(Error::DegenerateSample("no atoms survived the truncation".into()));
    }

    let mut plus_atoms: Vec<SideAtom> = Vec::with_capacity(atoms.len());
    let mut minus_atoms: Vec<SideAtom> = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let plus =
            draw_side_jumps(beta, alpha, (1.0 - atom.v) * atom.r, atom.t, &gmax, &mut rng, true);
        let minus = draw_side_jumps(beta, alpha, atom.v * atom.r, atom.t, &gmax, &mut rng, true);
        plus_atoms.push(SideAtom { level: atom.t, jumps: plus });
        minus_atoms.push(SideAtom { level: atom.t, jumps: minus });
    }
    let eta_plus_cap: f64 = plus_atoms.iter().map(|a| a.jumps.total()).sum();
    let eta_minus_cap: f64 = minus_atoms.iter().map(|a| a.jumps.total()).sum();
    let span = eta_plus_cap + eta_minus_cap;
    if !(span > 0.0) {
        return Err(Error::DegenerateSample("truncated sample has zero extent".into()));
    }
    let dt = span / grid_n as f64;
    let k0 = (eta_minus_cap / dt).round() as usize;

    let mut values: Vec<f64> = vec![m_cap; grid_n + 1];
    let mut shape_rng = rng.substream(0x5348);
    render_side(
        &plus_atoms,
        beta,
        alpha,
        gmax.scale,
        dt,
        &mut values,
        k0,
        grid_n,
        true,
        &mut shape_rng,
    );
    render_side(
        &minus_atoms,
        beta,
        alpha,
        gmax.scale,
        dt,
        &mut values,
        k0,
        grid_n,
        false,
        &mut shape_rng,
    );
    values[k0] = 0.0;

    let path = SampledPath::new(
        T::lit(-(k0 as f64) * dt),
        T::lit(dt),
        values.into_iter().map(T::lit).collect(),
        PathMeta { beta: T::lit(beta), kind: PathKind::HInfinity },
    )?;

    // step-function passage curves from the cumulated jump totals
    let mut acc = 0.0;
    let plus_knots: Vec<(T, T)> = plus_atoms
        .iter()
        .map(|a| {
            acc += a.jumps.total();
            (T::lit(a.level), T::lit(acc))
        })
        .collect();
    acc = 0.0;
    let minus_knots: Vec<(T, T)> = minus_atoms
        .iter()
        .map(|a| {
            acc += a.jumps.total();
            (T::lit(a.level), T::lit(acc))
        })
        .collect();
    let close = |mut knots: Vec<(T, T)>| {
        if knots.last().map(|&(t, _)| t) != Some(T::lit(m_cap)) {
            let last = knots.last().map(|&(_, x)| x).unwrap_or_else(T::zero);
            knots.push((T::lit(m_cap), last));
        }
        knots
    };
    Ok(HInfinitySample {
        path,
        eta_minus: EtaCurve { interp: EtaInterp::Step, knots: close(minus_knots) },
        eta_plus: EtaCurve { interp: EtaInterp::Step, knots: close(plus_knots) },
        truncation: Truncation { m_cap, r_min },
    })
}

struct SideAtom {
    level: f64,
    jumps: SideJumps,
}

#[allow(clippy::too_many_arguments)]
fn render_side(
    atoms: &[SideAtom],
    beta: f64,
    alpha: f64,
    gmax_scale: f64,
    dt: f64,
    values: &mut [f64],
    k0: usize,
    grid_n: usize,
    forward: bool,
    rng: &mut CounterRng,
) {
    let mut cursor = 0.0f64; // distance from the origin along this side
    for atom in atoms {
        // spacer from the sub-floor lifetimes sits at the segment start
        fill_constant(values, k0, grid_n, forward, cursor, cursor + atom.jumps.spacer, atom.level, dt);
        cursor += atom.jumps.spacer;
        for &sigma in &atom.jumps.sigmas {
            if sigma >= 4.0 * dt {
                let cells = ((sigma / dt).ceil() as usize).clamp(4, 8192);
                // the shape draws live in raw tree-route units; translate
                // the cap and re-apply the anchor to the glued height
                let y_cap = atom.level * sigma.powf(alpha) / gmax_scale;
                let shape = conditioned_unit_shape(beta, cells, y_cap, rng);
                let height = sigma.powf(-alpha) * gmax_scale;
                fill_shape(
                    values, k0, grid_n, forward, cursor, sigma, atom.level, height, &shape, dt,
                );
            } else {
                fill_constant(
                    values,
                    k0,
                    grid_n,
                    forward,
                    cursor,
                    cursor + sigma,
                    atom.level,
                    dt,
                );
            }
            cursor += sigma;
        }
    }
}

/// Unit excursion conditioned to stay below `y_cap`; redraws up to a cap
/// and keeps the lowest-maximum draw as a fallback.
fn conditioned_unit_shape(
    beta: f64,
    cells: usize,
    y_cap: f64,
    rng: &mut CounterRng,
) -> SampledPath<f64> {
    let mode = if cells <= 1024 { SizeMode::Exact } else { SizeMode::AtLeast };
    let mut best: Option<SampledPath<f64>> = None;
    let mut best_max = f64::INFINITY;
    for _ in 0..200 {
        let p = sample_stable_with::<f64>(beta, cells, mode, rng)
            .expect("unit shape parameters are valid");
        let m = p.max_and_argmax().0;
        if m <= y_cap {
            return p;
        }
        if m < best_max {
            best_max = m;
            best = Some(p);
        }
    }
    best.expect("at least one draw")
}

#[allow(clippy::too_many_arguments)]
fn fill_constant(
    values: &mut [f64],
    k0: usize,
    grid_n: usize,
    forward: bool,
    from: f64,
    to: f64,
    level: f64,
    dt: f64,
) {
    if to <= from {
        return;
    }
    let (first, last) = ((from / dt).ceil() as i64, (to / dt).floor() as i64);
    for j in first..=last {
        if let Some(idx) = grid_index(k0, grid_n, forward, j) {
            values[idx] = level;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_shape(
    values: &mut [f64],
    k0: usize,
    grid_n: usize,
    forward: bool,
    from: f64,
    sigma: f64,
    level: f64,
    height: f64,
    shape: &SampledPath<f64>,
    dt: f64,
) {
    let to = from + sigma;
    let (first, last) = ((from / dt).ceil() as i64, (to / dt).floor() as i64);
    for j in first..=last {
        if let Some(idx) = grid_index(k0, grid_n, forward, j) {
            let local = (j as f64 * dt - from) / sigma; // in [0, 1]
            let e = shape.eval(local.clamp(0.0, 1.0));
            values[idx] = (level - height * e).max(0.0);
        }
    }
}

fn grid_index(k0: usize, grid_n: usize, forward: bool, j: i64) -> Option<usize> {
    if j < 0 {
        return None;
    }
    let idx = if forward { k0 as i64 + j } else { k0 as i64 - j };
    (idx >= 0 && idx <= grid_n as i64).then_some(idx as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{eta_at, limit_fragmentation};
    use crate::stats;

    const BETA: f64 = 1.5;

    #[test]
    fn r_min_rule_is_sane() {
        let r = default_r_min(BETA, 4.0, 4096);
        assert!(r > 0.0 && r < 1e-3, "r_min = {r}");
        // stricter resolution pushes the floor down
        assert!(default_r_min(BETA, 4.0, 16_384) < r);
    }

    #[test]
    fn eta_sample_shape() {
        let r_min = default_r_min(BETA, 4.0, 4096);
        let s = sample_stable_eta_curves(BETA, 4.0, r_min, 1).unwrap();
        let t = sample_stable_eta_curves(BETA, 4.0, r_min, 1).unwrap();
        assert_eq!(s.eta_plus.knots, t.eta_plus.knots, "deterministic per seed");
        assert!(s.n_atoms > 0);
        // nondecreasing step curves
        for w in s.eta_plus.knots.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
        let e1 = s.eta_total(1.0).unwrap();
        let e2 = s.eta_total(2.0).unwrap();
        assert!(e1 >= 0.0 && e2 >= e1);
        assert!(s.eta_total(5.0).is_none(), "beyond the cap");
        assert!(sample_stable_eta_curves(2.0, 4.0, r_min, 1).is_err());
    }

    #[test]
    fn eta_self_similarity_reduced() {
        // m^{1/α} η(m) against η(1) at m = 2; reduced-size version of the
        // acceptance run
        let r_min = default_r_min(BETA, 4.0, 4096);
        let inv_alpha = 1.0 / (1.0 / BETA - 1.0); // = −3
        let trials = 1_500;
        let mut scaled = Vec::with_capacity(trials);
        let mut base = Vec::with_capacity(trials);
        for s in 0..trials as u64 {
            let a = sample_stable_eta_curves(BETA, 4.0, r_min, s).unwrap();
            scaled.push(2f64.powf(inv_alpha) * a.eta_total(2.0).unwrap());
            let b = sample_stable_eta_curves(BETA, 4.0, r_min, 70_000 + s).unwrap();
            base.push(b.eta_total(1.0).unwrap());
        }
        let d = stats::ks_statistic_two_sample(&scaled, &base);
        assert!(d < 0.08, "KS for η self-similarity: {d}");
    }

    #[test]
    fn full_sampler_structure() {
        let r_min = default_r_min(BETA, 4.0, 2048);
        for seed in 0..10 {
            let h: HInfinitySample<f64> =
                sample_h_infinity_stable(BETA, 4.0, r_min, 2048, seed).unwrap();
            assert!(h.path.eval(0.0).abs() < 1e-9, "origin pinned to zero");
            assert!(h.path.values.iter().all(|&v| (0.0..=4.0 + 1e-9).contains(&v)));
            // η curves consistent with the path domain
            let (em, ep) = eta_at(&h, 4.0).unwrap();
            let span = h.path.x_end() - h.path.x_start();
            assert!((em + ep - span).abs() < 2.0 * h.path.dt.as_f64() * 2.0 + 1e-9);
            // fragments exist and the origin component is (−η⁻(1), η⁺(1))
            let (set, ranked) = limit_fragmentation(&h).unwrap();
            assert!(!ranked.is_empty());
            let (a, b) = set.component_containing(0.0).expect("0 below level 1");
            let (m1, p1) = eta_at(&h, 1.0).unwrap();
            assert!(
                (b - a - (m1 + p1)).abs() < 0.1 * (m1 + p1).max(0.5),
                "origin component {} vs η(1) {}",
                b - a,
                m1 + p1
            );
        }
    }

    #[test]
    fn full_and_eta_routes_agree_in_law() {
        // the two construction routes must give the same η(1) law
        let r_min = default_r_min(BETA, 2.0, 1024);
        let trials = 400;
        let mut full = Vec::with_capacity(trials);
        let mut fast = Vec::with_capacity(trials);
        for s in 0..trials as u64 {
            let h: HInfinitySample<f64> =
                sample_h_infinity_stable(BETA, 2.0, r_min, 1024, s).unwrap();
            let (em, ep) = eta_at(&h, 1.0).unwrap();
            full.push(em + ep);
            let e = sample_stable_eta_curves(BETA, 2.0, r_min, 40_000 + s).unwrap();
            fast.push(e.eta_total(1.0).unwrap());
        }
        let d = stats::ks_statistic_two_sample(&full, &fast);
        assert!(d < 0.1, "KS between construction routes: {d}");
    }

    #[test]
    fn symmetry_in_law_reduced() {
        let r_min = default_r_min(BETA, 8.0, 1024);
        let trials = 1_000;
        let mut right = Vec::with_capacity(trials);
        let mut left = Vec::with_capacity(trials);
        for s in 0..trials as u64 {
            match sample_h_infinity_stable::<f64>(BETA, 8.0, r_min, 1024, 90_000 + s) {
                Ok(h) => {
                    if h.path.x_end() > 1.0 && h.path.x_start() < -1.0 {
                        right.push(h.path.eval(1.0));
                        left.push(h.path.eval(-1.0));
                    }
                }
                Err(_) => continue,
            }
        }
        assert!(right.len() > 600, "coverage {}", right.len());
        let d = stats::ks_statistic_two_sample(&right, &left);
        assert!(d < 0.09, "KS between H∞(±1): {d}");
    }
}
