//! The exact law of the maximum of the normalized Brownian excursion,
//! its sampler, and size-biased variants.

use crate::analytics::quad;
use crate::error::{Error, Result};
use crate::rng::{CounterRng, Seed};
use crate::scalar::Real;

/// Where we switch between the two theta-series representations. Both
/// converge quickly everywhere in [0.5, 1.5]; the dual form is the
/// numerically accurate one for small arguments.
const SERIES_SPLIT: f64 = 0.9;

/// P(max > t) for the normalized Brownian excursion.
///
/// `t <= 0` returns 1 by the continuity convention. The result is the
/// truncated theta series (terms below 1e-16 dropped), clamped to [0, 1].
pub fn kennedy_tail<T: Real>(t: T) -> T {
    let t = t.as_f64();
    if t <= 0.0 {
        return T::one();
    }
    let tail = if t < SERIES_SPLIT { 1.0 - dual_cdf(t) } else { primary_tail(t) };
    T::lit(tail.clamp(0.0, 1.0))
}

/// P(max ≤ t); complement of [`kennedy_tail`], same conventions.
pub fn kennedy_cdf<T: Real>(t: T) -> T {
    let t = t.as_f64();
    if t <= 0.0 {
        return T::zero();
    }
    let cdf = if t < SERIES_SPLIT { dual_cdf(t) } else { 1.0 - primary_tail(t) };
    T::lit(cdf.clamp(0.0, 1.0))
}

/// 2 Σ (4 t² n² − 1) e^{−2 t² n²}
pub(crate) fn primary_tail(t: f64) -> f64 {
    let mut sum = 0.0;
    for n in 1..10_000u64 {
        let a = 2.0 * t * t * (n * n) as f64;
        let term = 2.0 * (2.0 * a - 1.0) * (-a).exp();
        sum += term;
        if n >= 2 && term.abs() < 1e-16 {
            break;
        }
    }
    sum
}

/// √(2π) t^{−3} Σ (nπ)² e^{−(nπ)²/(2t²)}
pub(crate) fn dual_cdf(t: f64) -> f64 {
    let mut sum = 0.0;
    for n in 1..10_000u64 {
        let npi = n as f64 * std::f64::consts::PI;
        let term = npi * npi * (-npi * npi / (2.0 * t * t)).exp();
        sum += term;
        if term.abs() < 1e-20 {
            break;
        }
    }
    (2.0 * std::f64::consts::PI).sqrt() / (t * t * t) * sum
}

/// E[max^p] computed by quadrature of the tail: ∫ p t^{p−1} P(max > t) dt.
pub fn kennedy_moment(p: f64) -> f64 {
    assert!(p > 0.0);
    quad::integrate(|t: f64| p * t.powf(p - 1.0) * kennedy_tail(t), 0.0, 12.0, 1e-12).value
}

/// Quantile by bisection of the tail, to absolute tolerance 1e-12.
pub fn kennedy_quantile(u: f64) -> f64 {
    assert!((0.0..1.0).contains(&u), "quantile level must be in [0,1)");
    // tail is decreasing from 1 to 0; solve tail(t) = 1 - u.
    let target = 1.0 - u;
    let (mut lo, mut hi) = (1e-8, 12.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if kennedy_tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One exact draw of the excursion maximum (inverse-CDF).
pub fn kennedy_sample(seed: Seed) -> f64 {
    let mut rng = CounterRng::stream(seed, STREAM_KENNEDY, 0);
    kennedy_draw(&mut rng)
}

pub(crate) const STREAM_KENNEDY: u64 = 0x4b45;

pub(crate) fn kennedy_draw(rng: &mut CounterRng) -> f64 {
    kennedy_quantile(rng.uniform())
}

/// A batch of independent draws, one RNG stream per index.
pub fn kennedy_batch(n: usize, seed: Seed) -> Vec<f64> {
    (0..n)
        .map(|i| kennedy_quantile(CounterRng::stream(seed, STREAM_KENNEDY, i as u64).uniform()))
        .collect()
}

/// Draws from the law reweighted by ζ^power (rejection from the Kennedy law).
///
/// `power = 0` returns the base law unchanged. The acceptance envelope is
/// capped at the 1e-7 upper tail quantile of the base law; the clipped
/// weight mass above it is below 1e-6 relative for the powers in use.
pub fn size_biased_sample(power: f64, seed: Seed) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::invalid(format!(
            "size bias power must be finite and >= 0, got {power}"
        )));
    }
    let mut rng = CounterRng::stream(seed, STREAM_SIZE_BIASED, 0);
    Ok(size_biased_draw(power, &mut rng))
}

pub(crate) const STREAM_SIZE_BIASED: u64 = 0x5342;

pub(crate) fn size_biased_draw(power: f64, rng: &mut CounterRng) -> f64 {
    if power == 0.0 {
        return kennedy_draw(rng);
    }
    let cap = envelope_cap();
    loop {
        let z = kennedy_draw(rng);
        let accept = (z / cap).powf(power).min(1.0);
        if rng.uniform() < accept {
            return z;
        }
    }
}

pub fn size_biased_batch(power: f64, n: usize, seed: Seed) -> Result<Vec<f64>> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::invalid(format!(
            "size bias power must be finite and >= 0, got {power}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let mut rng = CounterRng::stream(seed, STREAM_SIZE_BIASED, i as u64);
            size_biased_draw(power, &mut rng)
        })
        .collect())
}

fn envelope_cap() -> f64 {
    // upper support quantile: tail(t) = 1e-7
    kennedy_quantile(1.0 - 1e-7)
}
