//! The Brownian limit function: two independent Bessel(3) processes
//! glued back to back at the origin.
//!
//! Besides the grid sampler there are two incremental walkers for the
//! Monte-Carlo harness: a passage sampler that runs each side exactly
//! until it first exceeds level 1, and a fragment sampler that resolves
//! the sub-level-1 structure at fine resolution while striding through
//! the supra-level region with coarse steps (a coarse step is taken only
//! from radius ≥ 3, so an undetected dip below 1 inside one would
//! require an 8-sigma move of the driving Brownian motion).

use super::HInfinitySample;
use crate::error::{Error, Result};
use crate::fragmentation::RankedMasses;
use crate::paths::brownian::{bridge_touches_level, BesselWalker};
use crate::paths::{PathKind, PathMeta, SampledPath};
use crate::rng::{CounterRng, Seed};
use crate::scalar::Real;

pub(crate) const STREAM_HINF_BM: u64 = 0x4849_424d;
pub(crate) const STREAM_HINF_BM_REFINE: u64 = 0x4849_424e;

/// Default fine step for the incremental walkers; one 2^14-step chunk
/// per unit of time.
pub const BROWNIAN_WALKER_DT: f64 = 1.0 / 16_384.0;

/// Grid sampler on [−L, L].
pub fn sample_h_infinity_brownian<T: Real>(
    l: f64,
    grid_n: usize,
    seed: Seed,
) -> Result<HInfinitySample<T>> {
    if !(l > 0.0) {
        return Err(Error::invalid("L must be positive"));
    }
    if grid_n < 2 {
        return Err(Error::invalid("grid_n must be at least 2"));
    }
    let dt = l / grid_n as f64;
    let mut rng_plus = CounterRng::stream(seed, STREAM_HINF_BM, 0);
    let mut rng_minus = CounterRng::stream(seed, STREAM_HINF_BM, 1);
    let mut plus = BesselWalker::new(dt);
    let mut minus = BesselWalker::new(dt);
    let mut values: Vec<T> = Vec::with_capacity(2 * grid_n + 1);
    let mut left: Vec<T> = (0..grid_n).map(|_| T::lit(minus.step(&mut rng_minus))).collect();
    left.reverse();
    values.extend(left);
    values.push(T::zero());
    values.extend((0..grid_n).map(|_| T::lit(plus.step(&mut rng_plus))));
    let path = SampledPath::new(
        T::lit(-l),
        T::lit(dt),
        values,
        PathMeta { beta: T::lit(2.0), kind: PathKind::HInfinity },
    )?;
    HInfinitySample::from_path(path)
}

/// First passage of level 1 on each side.
///
/// Sub-cell pokes above the level are sampled via the bridge-touch law
/// from a separate stream, so the passage is exact in law given the grid
/// marginals rather than carrying the O(√dt) late-detection bias of the
/// interpolant.
pub fn sample_passage_pair_brownian(seed: Seed, dt: f64) -> (f64, f64) {
    let mut rng_plus = CounterRng::stream(seed, STREAM_HINF_BM, 0);
    let mut rng_minus = CounterRng::stream(seed, STREAM_HINF_BM, 1);
    let mut ref_plus = CounterRng::stream(seed, STREAM_HINF_BM_REFINE, 0);
    let mut ref_minus = CounterRng::stream(seed, STREAM_HINF_BM_REFINE, 1);
    (
        passage_of_one(&mut rng_minus, Some(&mut ref_minus), dt),
        passage_of_one(&mut rng_plus, Some(&mut ref_plus), dt),
    )
}

/// Interpolant-only passage pair (no sub-cell refinement); matches the
/// grid sampler's passage curves exactly when fed the same streams.
#[cfg(test)]
fn sample_passage_pair_interpolant(seed: Seed, dt: f64) -> (f64, f64) {
    let mut rng_plus = CounterRng::stream(seed, STREAM_HINF_BM, 0);
    let mut rng_minus = CounterRng::stream(seed, STREAM_HINF_BM, 1);
    (passage_of_one(&mut rng_minus, None, dt), passage_of_one(&mut rng_plus, None, dt))
}

fn passage_of_one(rng: &mut CounterRng, mut refine: Option<&mut CounterRng>, dt: f64) -> f64 {
    let mut w = BesselWalker::new(dt);
    let mut prev = 0.0f64;
    let mut k = 0u64;
    loop {
        let r = w.step(rng);
        k += 1;
        if r >= 1.0 {
            let frac = (1.0 - prev) / (r - prev);
            return dt * ((k - 1) as f64 + frac);
        }
        if let Some(refine) = refine.as_deref_mut() {
            if prev > 0.0 && bridge_touches_level(prev, r, 1.0, dt, refine) {
                return dt * ((k - 1) as f64 + 0.5);
            }
        }
        prev = r;
    }
}

/// One draw of the limit fragmentation data.
#[derive(Clone, Debug)]
pub struct BrownianLimitSample {
    /// passage of level 1 left and right of the origin
    pub eta_minus: f64,
    pub eta_plus: f64,
    /// ranked lengths of the components of {H∞ < 1}
    pub masses: RankedMasses<f64>,
    /// their total (the Lebesgue measure of the sub-level set)
    pub total_mass: f64,
}

const COARSE_ENTER: f64 = 3.0;
const COARSE_FACTOR: usize = 64;
/// stop once the radius is this high; a later return below 1 has
/// probability 1/R_STOP and the fragments it could contribute are small
const R_STOP: f64 = 20.0;
const X_STOP_MIN: f64 = 8.0;

/// Samples the fragment structure of {H∞ < 1} for the Brownian limit.
pub fn sample_limit_masses_brownian(seed: Seed, dt: f64) -> BrownianLimitSample {
    let mut rng_plus = CounterRng::stream(seed, STREAM_HINF_BM, 0);
    let mut rng_minus = CounterRng::stream(seed, STREAM_HINF_BM, 1);
    let mut ref_plus = CounterRng::stream(seed, STREAM_HINF_BM_REFINE, 0);
    let mut ref_minus = CounterRng::stream(seed, STREAM_HINF_BM_REFINE, 1);
    let (eta_plus, mut frag_plus) = side_fragments(&mut rng_plus, &mut ref_plus, dt);
    let (eta_minus, mut frag_minus) = side_fragments(&mut rng_minus, &mut ref_minus, dt);
    let mut lengths = vec![eta_minus + eta_plus];
    lengths.append(&mut frag_plus);
    lengths.append(&mut frag_minus);
    let total = lengths.iter().sum();
    BrownianLimitSample {
        eta_minus,
        eta_plus,
        masses: RankedMasses::from_lengths(lengths),
        total_mass: total,
    }
}

/// Walks one side; returns the passage of level 1 and the lengths of the
/// later excursions below 1. Sub-cell touches of the level are sampled
/// from the refinement stream in both directions: pokes from below end
/// the current region early, dips from above split what the grid sees as
/// one supra-level stretch (the fragment such a dip contributes is
/// shorter than a cell and is dropped as dust).
fn side_fragments(rng: &mut CounterRng, refine: &mut CounterRng, dt: f64) -> (f64, Vec<f64>) {
    let mut w = BesselWalker::new(dt);
    let coarse_dt = dt * COARSE_FACTOR as f64;
    let mut coarse = BesselWalker::new(coarse_dt);
    let mut x = 0.0f64;
    let mut prev = 0.0f64;
    let mut passage: Option<f64> = None;
    let mut fragments: Vec<f64> = Vec::new();
    let mut below_since: Option<f64> = None;
    loop {
        let (r, step) = if prev >= COARSE_ENTER && below_since.is_none() && passage.is_some() {
            coarse.copy_state(&w);
            let r = coarse.step(rng);
            w.copy_state(&coarse);
            (r, coarse_dt)
        } else {
            (w.step(rng), dt)
        };
        let x_next = x + step;
        let same_side_below = prev > 0.0 && prev < 1.0 && r < 1.0;
        let same_side_above = prev > 1.0 && r > 1.0;
        if passage.is_none() {
            if r >= 1.0 {
                let frac = (1.0 - prev) / (r - prev);
                passage = Some(x + step * frac);
            } else if same_side_below && bridge_touches_level(prev, r, 1.0, step, refine) {
                passage = Some(x + 0.5 * step);
            }
        } else if below_since.is_none() {
            if r < 1.0 {
                let frac = (prev - 1.0) / (prev - r);
                below_since = Some(x + step * frac);
            } else if same_side_above && bridge_touches_level(prev, r, 1.0, step, refine) {
                // a dip: a sub-cell fragment (dust) bounded by two touches
            }
        } else if r >= 1.0 {
            let frac = (1.0 - prev) / (r - prev);
            fragments.push(x + step * frac - below_since.take().unwrap());
        } else if same_side_below && bridge_touches_level(prev, r, 1.0, step, refine) {
            fragments.push(x + 0.5 * step - below_since.take().unwrap());
            // the path returns below the level within the same cell
            below_since = Some(x + 0.5 * step);
        }
        if passage.is_some() && below_since.is_none() && r >= R_STOP && x_next >= X_STOP_MIN {
            return (passage.unwrap(), fragments);
        }
        prev = r;
        x = x_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{laplace_last_fragment_brownian, laplace_total_mass_brownian};
    use crate::limits::{eta_at, limit_fragmentation};
    use crate::stats;

    #[test]
    fn sampler_shape() {
        let s: HInfinitySample<f64> = sample_h_infinity_brownian(10.0, 4096, 7).unwrap();
        assert_eq!(s.path.eval(0.0), 0.0);
        assert!(s.path.values.iter().all(|&v| v >= 0.0));
        let t = sample_h_infinity_brownian::<f64>(10.0, 4096, 7).unwrap();
        assert_eq!(s.path.values, t.path.values);
        assert!(sample_h_infinity_brownian::<f64>(0.0, 64, 1).is_err());
    }

    #[test]
    fn eta_agrees_with_walker_route() {
        // the grid sampler and the incremental walker consume the same
        // stream, so their level-1 passages must agree to grid accuracy
        for seed in 0..20 {
            let dt = 1.0 / 4096.0;
            let s: HInfinitySample<f64> = sample_h_infinity_brownian(12.0, 12 * 4096, seed).unwrap();
            let (em, ep) = eta_at(&s, 1.0).unwrap();
            let (wm, wp) = sample_passage_pair_interpolant(seed, dt);
            assert!((em - wm).abs() < 1e-9, "minus: {em} vs {wm}");
            assert!((ep - wp).abs() < 1e-9, "plus: {ep} vs {wp}");
        }
    }

    #[test]
    fn passage_pair_mean() {
        // E[T₊ + T₋] = 2/3, reduced-size version of the acceptance run
        let trials = 2_000;
        let sums: Vec<f64> = (0..trials)
            .map(|s| {
                let (a, b) = sample_passage_pair_brownian(s, BROWNIAN_WALKER_DT);
                a + b
            })
            .collect();
        let m = stats::mean_std_err(&sums);
        assert!((m.mean - 2.0 / 3.0).abs() < 3.0 * m.std_err + 0.01, "η(1) mean {}", m.mean);
    }

    #[test]
    fn total_mass_laplace_transform() {
        // E[e^{−λ·Leb{H∞<1}}] = (cosh √(2λ))^{−2}, reduced size
        let trials = 2_000;
        let mut acc = [0.0f64; 2];
        let lambdas = [0.5, 1.0];
        for s in 0..trials {
            let lm = sample_limit_masses_brownian(s, 2.0 * BROWNIAN_WALKER_DT);
            for (j, &l) in lambdas.iter().enumerate() {
                acc[j] += (-l * lm.total_mass).exp();
            }
        }
        for (j, &l) in lambdas.iter().enumerate() {
            let est = acc[j] / trials as f64;
            let target: f64 = laplace_total_mass_brownian(l);
            assert!((est - target).abs() < 0.02, "λ={l}: {est} vs {target}");
        }
    }

    #[test]
    fn central_fragment_laplace_transform() {
        let trials = 2_000;
        let mut acc = 0.0f64;
        for s in 0..trials {
            let lm = sample_limit_masses_brownian(s, 2.0 * BROWNIAN_WALKER_DT);
            acc += (-(lm.eta_minus + lm.eta_plus)).exp();
        }
        let est = acc / trials as f64;
        let target: f64 = laplace_last_fragment_brownian(1.0);
        assert!((est - target).abs() < 0.02, "{est} vs {target}");
    }

    #[test]
    fn divergence_with_the_horizon() {
        // min over |x| in [L/2, L] exceeds 1 with frequency growing in L
        let trials = 400;
        let mut freqs = Vec::new();
        for &l in &[10.0f64, 40.0] {
            let grid = (l * 512.0) as usize;
            let mut ok = 0;
            for s in 0..trials {
                let h: HInfinitySample<f64> =
                    sample_h_infinity_brownian(l, grid, 600 + s).unwrap();
                let n = h.path.values.len();
                let quarter = n / 4;
                let min_outer = h.path.values[..quarter]
                    .iter()
                    .chain(&h.path.values[n - quarter..])
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if min_outer > 1.0 {
                    ok += 1;
                }
            }
            freqs.push(ok as f64 / trials as f64);
        }
        assert!(
            freqs[1] >= freqs[0] - 0.02 && freqs[1] > 0.8,
            "frequencies {freqs:?} should approach 1"
        );
    }

    #[test]
    fn symmetry_in_law() {
        let trials = 10_000;
        let mut right = Vec::with_capacity(trials);
        let mut left = Vec::with_capacity(trials);
        for s in 0..trials {
            let h: HInfinitySample<f64> = sample_h_infinity_brownian(2.0, 256, 4_000 + s as u64).unwrap();
            right.push(h.path.eval(1.0));
            left.push(h.path.eval(-1.0));
        }
        let d = stats::ks_statistic_two_sample(&right, &left);
        assert!(d < 0.04, "KS between H∞(1) and H∞(−1): {d}");
    }

    #[test]
    fn self_similarity_exact_case() {
        // m^{-1/2} H∞(m·1) against H∞(1) at m = 4
        let trials = 5_000;
        let mut scaled = Vec::with_capacity(trials);
        let mut base = Vec::with_capacity(trials);
        for s in 0..trials {
            let h: HInfinitySample<f64> =
                sample_h_infinity_brownian(5.0, 1280, 9_000 + s as u64).unwrap();
            scaled.push(0.5 * h.path.eval(4.0));
            let g: HInfinitySample<f64> =
                sample_h_infinity_brownian(2.0, 512, 60_000 + s as u64).unwrap();
            base.push(g.path.eval(1.0));
        }
        let d = stats::ks_statistic_two_sample(&scaled, &base);
        assert!(d < 0.05, "KS for the scaling identity: {d}");
    }

    #[test]
    fn williams_flip_of_capped_sample() {
        for seed in 100..120 {
            let h: HInfinitySample<f64> = sample_h_infinity_brownian(14.0, 14 * 2048, seed).unwrap();
            let (em, ep) = eta_at(&h, 1.0).unwrap();
            let eta = em + ep;
            // flipped: x ↦ 1 − H∞(x − η⁻) on [0, η]
            let f = |x: f64| 1.0 - h.path.eval(x - em);
            assert!(f(0.0).abs() < 5e-2, "starts near 0 (grid-limited)");
            assert!(f(eta).abs() < 5e-2, "ends near 0 (grid-limited)");
            assert!((f(em) - 1.0).abs() < 1e-12, "max exactly 1 at the origin's image");
            let mut max = f64::MIN;
            let mut min = f64::MAX;
            let steps = 2000;
            for i in 0..=steps {
                let v = f(eta * i as f64 / steps as f64);
                max = max.max(v);
                min = min.min(v);
            }
            assert!(max <= 1.0 + 1e-9, "flip never exceeds 1 inside the cap");
            assert!(min.abs() < 5e-2, "min near 0");
        }
    }

    #[test]
    fn limit_fragmentation_top_mass_covers_origin_component() {
        for seed in 0..30 {
            let h: HInfinitySample<f64> = sample_h_infinity_brownian(20.0, 20 * 1024, seed).unwrap();
            let (set, ranked) = limit_fragmentation(&h).unwrap();
            let (a, b) = set.component_containing(0.0).expect("0 is in the sub-level set");
            assert!(ranked.get(0) >= b - a - 1e-12);
            let (em, ep) = eta_at(&h, 1.0).unwrap();
            assert!((b - a - (em + ep)).abs() < 1e-9, "origin component is (−η⁻, η⁺)");
        }
    }
}
