//! Brownian bridge, normalized excursion (Vervaat rotation) and the
//! Bessel(3) process, all exact in law at the grid points.

use super::{PathKind, PathMeta, SampledPath};
use crate::error::{Error, Result};
use crate::rng::{CounterRng, Seed};
use crate::scalar::Real;

pub(crate) const STREAM_BRIDGE: u64 = 0x4252;
pub(crate) const STREAM_BESSEL: u64 = 0x4245;

/// Standard Brownian bridge on [0, 1]: a Brownian walk with the linear
/// drift to its endpoint removed. Exact joint law at the grid points.
pub fn sample_brownian_bridge<T: Real>(grid_n: usize, seed: Seed) -> Result<SampledPath<T>> {
    let mut rng = CounterRng::stream(seed, STREAM_BRIDGE, 0);
    sample_bridge_with(grid_n, &mut rng)
}

pub(crate) fn sample_bridge_with<T: Real>(
    grid_n: usize,
    rng: &mut CounterRng,
) -> Result<SampledPath<T>> {
    if grid_n < 2 {
        return Err(Error::invalid("bridge needs grid_n >= 2"));
    }
    let dt = 1.0 / grid_n as f64;
    let sd = dt.sqrt();
    let mut walk = Vec::with_capacity(grid_n + 1);
    walk.push(0.0f64);
    let mut acc = 0.0;
    for _ in 0..grid_n {
        acc += sd * rng.normal();
        walk.push(acc);
    }
    let w_end = acc;
    let mut values: Vec<T> = walk
        .iter()
        .enumerate()
        .map(|(i, &w)| T::lit(w - w_end * (i as f64 * dt)))
        .collect();
    values[0] = T::zero();
    values[grid_n] = T::zero();
    SampledPath::new(
        T::zero(),
        T::lit(dt),
        values,
        PathMeta { beta: T::lit(2.0), kind: PathKind::Generic },
    )
}

/// Normalized Brownian excursion via the Vervaat rotation of a bridge at
/// its leftmost minimum; exact in law at the grid points.
pub fn sample_brownian_excursion<T: Real>(grid_n: usize, seed: Seed) -> Result<SampledPath<T>> {
    let mut rng = CounterRng::stream(seed, STREAM_BRIDGE, 0);
    sample_excursion_with(grid_n, &mut rng)
}

pub(crate) fn sample_excursion_with<T: Real>(
    grid_n: usize,
    rng: &mut CounterRng,
) -> Result<SampledPath<T>> {
    let bridge: SampledPath<T> = sample_bridge_with(grid_n, rng)?;
    let b = &bridge.values;
    let mut min_idx = 0usize;
    for i in 1..grid_n {
        if b[i] < b[min_idx] {
            min_idx = i;
        }
    }
    let min_val = b[min_idx];
    let mut values = Vec::with_capacity(grid_n + 1);
    for k in 0..=grid_n {
        let idx = (min_idx + k) % grid_n;
        let v = b[idx] - min_val;
        values.push(if v < T::zero() { T::zero() } else { v });
    }
    values[0] = T::zero();
    values[grid_n] = T::zero();
    SampledPath::new(
        T::zero(),
        bridge.dt,
        values,
        PathMeta { beta: T::lit(2.0), kind: PathKind::Excursion },
    )
}

/// Bessel(3) started at 0: the norm of three independent Brownian
/// motions, exact at the grid points.
pub fn sample_bessel3<T: Real>(grid_n: usize, horizon_t: f64, seed: Seed) -> Result<SampledPath<T>> {
    if grid_n < 1 {
        return Err(Error::invalid("bessel needs grid_n >= 1"));
    }
    if !(horizon_t > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    let mut rng = CounterRng::stream(seed, STREAM_BESSEL, 0);
    let mut walker = BesselWalker::new(horizon_t / grid_n as f64);
    let mut values = Vec::with_capacity(grid_n + 1);
    values.push(T::zero());
    for _ in 0..grid_n {
        values.push(T::lit(walker.step(&mut rng)));
    }
    SampledPath::new(
        T::zero(),
        T::lit(horizon_t / grid_n as f64),
        values,
        PathMeta { beta: T::lit(2.0), kind: PathKind::Bessel3 },
    )
}

/// Samples the maximum of the continuum excursion consistent with the
/// grid values.
///
/// The grid path is exact in law at the grid points, but its running
/// maximum sits ~0.6·√dt below the continuum maximum, and the
/// near-extinction rescalings divide that gap by t — at the experiment
/// scales that alone would swamp every tolerance. Conditionally on the
/// grid values the path inside each cell is a Brownian bridge, whose
/// maximum has the closed-form tail exp(−2(m−a)(m−b)/dt); sampling the
/// per-cell maxima over the cells whose endpoints could plausibly host
/// the maximum gives a draw of the continuum maximum, exact in law given
/// the grid. (The positivity conditioning of the excursion only affects
/// cells near height zero, which cannot host the maximum.)
pub fn refine_excursion_max(path: &SampledPath<f64>, rng: &mut CounterRng) -> f64 {
    assert_eq!(path.meta.kind, PathKind::Excursion);
    assert_eq!(path.meta.beta, 2.0, "cell-bridge refinement is a Brownian-case tool");
    let dt = path.dt;
    let (grid_max, _) = path.max_and_argmax();
    // excess beyond e* has probability under 1e-12 per cell
    let e_star = (13.9 * dt).sqrt();
    let floor = grid_max - e_star;
    let mut best = grid_max;
    for w in path.values.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.max(b) <= floor {
            continue;
        }
        let u = rng.uniform_open();
        let d = a - b;
        let m = 0.5 * ((a + b) + (d * d - 2.0 * dt * u.ln()).sqrt());
        if m > best {
            best = m;
        }
    }
    best
}

/// Conditionally on cell endpoints a, b both strictly beyond `level`, a
/// Brownian path touches the level inside the cell with probability
/// exp(−2(a−level)(b−level)/dt). Sampling these events is what makes
/// level-crossing statistics exact in law given the grid; without it the
/// interpolant glues over every sub-cell excursion.
#[inline]
pub fn bridge_touches_level(a: f64, b: f64, level: f64, dt: f64, rng: &mut CounterRng) -> bool {
    let pa = a - level;
    let pb = b - level;
    debug_assert!(pa * pb > 0.0, "endpoints must sit on the same side");
    let expo = -2.0 * pa * pb / dt;
    if expo < -30.0 {
        return false;
    }
    rng.uniform() < expo.exp()
}

/// Incremental driver for the 3-component representation; lets callers
/// extend a path until a passage happens without fixing a horizon.
pub(crate) struct BesselWalker {
    sd: f64,
    w: [f64; 3],
}

impl BesselWalker {
    pub fn new(dt: f64) -> Self {
        BesselWalker { sd: dt.sqrt(), w: [0.0; 3] }
    }

    /// Advances one grid step and returns the new radius.
    #[inline]
    pub fn step(&mut self, rng: &mut CounterRng) -> f64 {
        for wi in self.w.iter_mut() {
            *wi += self.sd * rng.normal();
        }
        self.radius()
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        (self.w[0] * self.w[0] + self.w[1] * self.w[1] + self.w[2] * self.w[2]).sqrt()
    }

    /// Adopts another walker's position (the step size stays this one's);
    /// lets a fine and a coarse walker leapfrog over the same components.
    pub fn copy_state(&mut self, other: &BesselWalker) {
        self.w = other.w;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::kennedy::kennedy_cdf;
    use crate::stats;

    #[test]
    fn bridge_shape_and_determinism() {
        let a: SampledPath<f64> = sample_brownian_bridge(4, 9).unwrap();
        let b: SampledPath<f64> = sample_brownian_bridge(4, 9).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a.values[4], 0.0);
        assert!(sample_brownian_bridge::<f64>(1, 0).is_err());
    }

    #[test]
    fn bridge_midpoint_mean_and_variance() {
        // grid_n = 2: one free value, centered Gaussian with variance 1/4
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for s in 0..n {
            let p: SampledPath<f64> = sample_brownian_bridge(2, s as u64).unwrap();
            sum += p.values[1];
            sumsq += p.values[1] * p.values[1];
        }
        let mean = sum / n as f64;
        assert!(mean.abs() < 3.0 * 0.5 / (n as f64).sqrt(), "mean {mean}");
        let var = sumsq / n as f64 - mean * mean;
        let se_var = 0.25 * (2.0 / n as f64).sqrt();
        assert!((var - 0.25).abs() < 3.0 * se_var, "var {var}");
    }

    #[test]
    fn bridge_marginal_variance_profile() {
        // Var B(t) = t(1−t) at t in {1/4, 1/2, 3/4}
        let n = 100_000;
        let mut sums = [0.0f64; 3];
        let mut sumsqs = [0.0f64; 3];
        for s in 0..n {
            let p: SampledPath<f64> = sample_brownian_bridge(8, s as u64).unwrap();
            for (j, &idx) in [2usize, 4, 6].iter().enumerate() {
                sums[j] += p.values[idx];
                sumsqs[j] += p.values[idx] * p.values[idx];
            }
        }
        for (j, &t) in [0.25f64, 0.5, 0.75].iter().enumerate() {
            let mean = sums[j] / n as f64;
            let var = sumsqs[j] / n as f64 - mean * mean;
            let target = t * (1.0 - t);
            let se = target * (2.0 / n as f64).sqrt();
            assert!((var - target).abs() < 3.0 * se, "t={t}: var {var} vs {target}");
        }
    }

    #[test]
    fn excursion_is_nonnegative_with_zero_endpoints() {
        for s in 0..200 {
            let e: SampledPath<f64> = sample_brownian_excursion(512, s).unwrap();
            assert_eq!(e.values[0], 0.0);
            assert_eq!(e.values[512], 0.0);
            assert!(e.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn excursion_interior_strictly_positive_mostly() {
        // discretization may touch zero, but rarely at this resolution
        let trials = 500;
        let mut strictly_positive = 0;
        for s in 0..trials {
            let e: SampledPath<f64> = sample_brownian_excursion(1024, 1000 + s).unwrap();
            if e.values[1..1024].iter().all(|&v| v > 0.0) {
                strictly_positive += 1;
            }
        }
        assert!(
            strictly_positive as f64 >= 0.99 * trials as f64,
            "only {strictly_positive}/{trials} strictly positive"
        );
    }

    #[test]
    fn excursion_max_against_the_series_law() {
        // reduced-size version of the full acceptance check
        let trials = 5_000;
        let maxes: Vec<f64> = (0..trials)
            .map(|s| {
                let e: SampledPath<f64> = sample_brownian_excursion(4096, 7_000 + s).unwrap();
                e.max_and_argmax().0
            })
            .collect();
        let d = stats::ks_statistic_cdf(&maxes, |t| kennedy_cdf(t));
        assert!(d < 0.03, "KS against the excursion-max law: {d}");
    }

    #[test]
    fn excursion_time_reversal_symmetry() {
        // the max is invariant under reversal pathwise; the law of the
        // first-half maximum must match its reversed counterpart
        let trials = 10_000;
        let mut fwd = Vec::with_capacity(trials);
        let mut rev = Vec::with_capacity(trials);
        for s in 0..trials {
            let e: SampledPath<f64> = sample_brownian_excursion(256, 30_000 + s as u64).unwrap();
            let half = 128;
            let m_fwd = e.values[..=half].iter().cloned().fold(0.0f64, f64::max);
            let m_rev = e.values[half..].iter().cloned().fold(0.0f64, f64::max);
            let (m, _) = e.max_and_argmax();
            let mut reversed = e.values.clone();
            reversed.reverse();
            let m_of_reversed = reversed.iter().cloned().fold(0.0f64, f64::max);
            assert_eq!(m, m_of_reversed);
            fwd.push(m_fwd);
            rev.push(m_rev);
        }
        let d = stats::ks_statistic_two_sample(&fwd, &rev);
        assert!(d < 0.02, "KS between half-maxima: {d}");
    }

    #[test]
    fn bessel_starts_at_zero_and_second_moment() {
        assert!(sample_bessel3::<f64>(16, 0.0, 1).is_err());
        let n = 100_000;
        let mut sum = 0.0;
        for s in 0..n {
            let p: SampledPath<f64> = sample_bessel3(64, 1.0, s as u64).unwrap();
            assert_eq!(p.values[0], 0.0);
            assert!(p.values.iter().all(|&v| v >= 0.0));
            let r1 = p.values[64];
            sum += r1 * r1;
        }
        let mean = sum / n as f64;
        // R(1)² is a sum of three squared unit Gaussians: mean 3, var 6
        let se = (6.0f64 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "E R(1)² = {mean}");
    }

    #[test]
    fn bessel_first_passage_mean() {
        // E[first hit of 1] = 1/3 from the expansion of √(2λ)/sinh√(2λ)
        let trials = 10_000;
        let grid_n = 16_384;
        let horizon = 4.0;
        let mut hits = Vec::with_capacity(trials);
        for s in 0..trials {
            let p: SampledPath<f64> = sample_bessel3(grid_n, horizon, 50_000 + s as u64).unwrap();
            let dt = p.dt;
            let mut t_hit = horizon; // censored at the horizon
            for i in 0..grid_n {
                if p.values[i + 1] >= 1.0 {
                    let frac = (1.0 - p.values[i]) / (p.values[i + 1] - p.values[i]);
                    t_hit = dt * (i as f64 + frac);
                    break;
                }
            }
            hits.push(t_hit);
        }
        let m = stats::mean_std_err(&hits);
        assert!(
            (m.mean - 1.0 / 3.0).abs() < 0.02,
            "mean hitting time {} ± {}",
            m.mean,
            m.std_err
        );
    }
}
