//! The interval fragmentation carved out of a path: exact level sets of
//! the piecewise-linear interpolant, ranked masses, extinction data,
//! last-fragment and tagged-fragment processes, and the rescaled
//! near-extinction snapshot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{PathKind, SampledPath};
use crate::scalar::Real;

/// A bounded open subset of the line as maximal open intervals, sorted.
///
/// Components whose closures touch (a crossing that only grazes the
/// level at a single point) are kept as separate entries with
/// `b_i == a_{i+1}`, matching the componentization of {f > t}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> OpenSet<T> {
    pub fn empty() -> Self {
        OpenSet { intervals: Vec::new() }
    }

    pub fn from_intervals(intervals: Vec<(T, T)>) -> Result<Self> {
        for w in &intervals {
            if !(w.0 < w.1) {
                return Err(Error::invalid("intervals need a < b"));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::invalid("intervals must be sorted and disjoint"));
            }
        }
        Ok(OpenSet { intervals })
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> T {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    /// The component strictly containing x, if any.
    pub fn component_containing(&self, x: T) -> Option<(T, T)> {
        let idx = self.intervals.partition_point(|&(a, _)| a < x);
        if idx == 0 {
            return None;
        }
        let (a, b) = self.intervals[idx - 1];
        (x > a && x < b).then_some((a, b))
    }

    pub fn contains(&self, x: T) -> bool {
        self.component_containing(x).is_some()
    }

    /// Affine image x ↦ (x − center)·scale, scale > 0.
    pub fn recentered_scaled(&self, center: T, scale: T) -> OpenSet<T> {
        assert!(scale > T::zero());
        OpenSet {
            intervals: self
                .intervals
                .iter()
                .map(|&(a, b)| ((a - center) * scale, (b - center) * scale))
                .collect(),
        }
    }

    /// True if every component of `self` lies inside one component of
    /// `coarser`; exact interval arithmetic.
    pub fn nested_in(&self, coarser: &OpenSet<T>) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            coarser
                .intervals
                .iter()
                .any(|&(ca, cb)| ca <= a && b <= cb)
        })
    }
}

/// Non-increasing sequence of nonnegative masses with finite sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedMasses<T> {
    masses: Vec<T>,
}

impl<T: Real> RankedMasses<T> {
    pub fn from_lengths(mut lengths: Vec<T>) -> Self {
        lengths.retain(|l| *l > T::zero());
        lengths.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        RankedMasses { masses: lengths }
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// k-th largest mass (0-indexed); zero beyond the support.
    pub fn get(&self, k: usize) -> T {
        self.masses.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn sum(&self) -> T {
        self.masses.iter().copied().sum()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Strict super-level set {x : f(x) > level} of a polyline, exact on the
/// interpolant; crossings are solved linearly inside grid cells.
pub fn polyline_super_level<T: Real>(
    points: impl Iterator<Item = (T, T)>,
    level: T,
) -> OpenSet<T> {
    polyline_region(points, level, true)
}

/// Strict sub-level set {x : f(x) < level}.
pub fn polyline_sub_level<T: Real>(points: impl Iterator<Item = (T, T)>, level: T) -> OpenSet<T> {
    polyline_region(points, level, false)
}

fn polyline_region<T: Real>(
    mut points: impl Iterator<Item = (T, T)>,
    level: T,
    above: bool,
) -> OpenSet<T> {
    let inside = |v: T| if above { v > level } else { v < level };
    let mut intervals: Vec<(T, T)> = Vec::new();
    let Some((mut xa, mut va)) = points.next() else {
        return OpenSet::empty();
    };
    let mut open_at = inside(va).then_some(xa);
    for (xb, vb) in points {
        match (open_at, inside(vb)) {
            (Some(_), true) | (None, false) => {}
            (Some(a), false) => {
                // crossing out of the region within (xa, xb]
                let cross = xa + (xb - xa) * (level - va) / (vb - va);
                intervals.push((a, cross));
                open_at = None;
            }
            (None, true) => {
                let cross = if inside(va) || va == level {
                    // grazed the level exactly at the grid point
                    xa
                } else {
                    xa + (xb - xa) * (level - va) / (vb - va)
                };
                open_at = Some(cross);
            }
        }
        xa = xb;
        va = vb;
    }
    if let Some(a) = open_at {
        intervals.push((a, xa));
    }
    OpenSet { intervals }
}

fn path_points<T: Real>(path: &SampledPath<T>) -> impl Iterator<Item = (T, T)> + '_ {
    path.values
        .iter()
        .enumerate()
        .map(move |(i, &v)| (path.t0 + path.dt * T::from_usize(i).unwrap(), v))
}

/// O(t) = {x : path(x) > t}, the state of the interval fragmentation.
pub fn level_set<T: Real>(path: &SampledPath<T>, level: T) -> Result<OpenSet<T>> {
    if level < T::zero() {
        return Err(Error::invalid("level must be nonnegative"));
    }
    if !matches!(path.meta.kind, PathKind::Excursion | PathKind::HInfinity) {
        return Err(Error::invalid("level sets are defined for excursion-like paths"));
    }
    Ok(polyline_super_level(path_points(path), level))
}

/// Ranked lengths of the interval components.
pub fn ranked_lengths<T: Real>(set: &OpenSet<T>) -> RankedMasses<T> {
    RankedMasses::from_lengths(set.intervals.iter().map(|&(a, b)| b - a).collect())
}

/// Extinction time (the maximum of the path) and the leftmost point
/// attaining it.
pub fn extinction<T: Real>(path: &SampledPath<T>) -> Result<(T, T)> {
    if path.meta.kind != PathKind::Excursion {
        return Err(Error::invalid("extinction is defined for excursions"));
    }
    Ok(path.max_and_argmax())
}

/// The component of O(t) containing the argmax, and its length.
pub fn last_fragment<T: Real>(path: &SampledPath<T>, t: T) -> Result<((T, T), T)> {
    let (zeta, x_star) = extinction(path)?;
    if t < T::zero() {
        return Err(Error::invalid("level must be nonnegative"));
    }
    if t >= zeta {
        return Err(Error::OutOfRange(format!(
            "level {t} is not below the extinction time {zeta}"
        )));
    }
    let set = level_set(path, t)?;
    let comp = set
        .component_containing(x_star)
        .expect("the argmax lies strictly above any level below the maximum");
    Ok((comp, comp.1 - comp.0))
}

/// The rescaled near-extinction snapshot t^{1/α}·(O(ζ−t) − x*).
pub fn rescaled_snapshot<T: Real>(path: &SampledPath<T>, t: T, alpha: T) -> Result<OpenSet<T>> {
    let a = alpha.as_f64();
    if !(-0.5..0.0).contains(&a) {
        return Err(Error::invalid(format!("alpha must lie in [-1/2, 0), got {a}")));
    }
    let (zeta, x_star) = extinction(path)?;
    if !(t > T::zero()) || t >= zeta {
        return Err(Error::OutOfRange(format!(
            "t = {t} must lie strictly between 0 and the extinction time {zeta}"
        )));
    }
    let set = level_set(path, zeta - t)?;
    let scale = T::lit(t.as_f64().powf(1.0 / a));
    Ok(set.recentered_scaled(x_star, scale))
}

/// Length of the fragment containing the tag u at time t; 0 once the tag
/// is in the dust.
pub fn tagged_fragment<T: Real>(path: &SampledPath<T>, u: T, t: T) -> Result<T> {
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::invalid("the tag must lie in (0, 1)"));
    }
    if t < T::zero() {
        return Err(Error::invalid("time must be nonnegative"));
    }
    let set = level_set(path, t)?;
    Ok(set.component_containing(u).map(|(a, b)| b - a).unwrap_or_else(T::zero))
}

/// Ranked masses along an ascending list of levels.
pub fn fragmentation_trajectory<T: Real>(
    path: &SampledPath<T>,
    levels: &[T],
) -> Result<Vec<RankedMasses<T>>> {
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("levels must be ascending"));
    }
    levels.iter().map(|&l| Ok(ranked_lengths(&level_set(path, l)?))).collect()
}

/// Lebesgue measure of {x : path(x) > level}, computed cell by cell;
/// an independent route for the mass-accounting checks.
pub fn measure_above<T: Real>(path: &SampledPath<T>, level: T) -> T {
    let mut total = T::zero();
    for w in path.values.windows(2) {
        let (va, vb) = (w[0], w[1]);
        let (lo, hi) = if va < vb { (va, vb) } else { (vb, va) };
        if lo > level {
            total += path.dt;
        } else if hi > level {
            total += path.dt * (hi - level) / (hi - lo);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::brownian_dislocation_density;
    use crate::paths::{sample_brownian_excursion, tent_path};
    use crate::stats;

    fn tent() -> SampledPath<f64> {
        tent_path(64, 0.5, 1.0)
    }

    #[test]
    fn tent_level_sets() {
        let set = level_set(&tent(), 0.5).unwrap();
        assert_eq!(set.intervals(), &[(0.25, 0.75)]);
        let zero = level_set(&tent(), 0.0).unwrap();
        assert_eq!(zero.intervals(), &[(0.0, 1.0)]);
        let above = level_set(&tent(), 1.5).unwrap();
        assert!(above.is_empty());
        assert!(level_set(&tent(), -0.1).is_err());
    }

    #[test]
    fn grazing_level_keeps_components_separate() {
        // two tents of height 1 and 0.5 meeting at x = 0.5
        let values = vec![0.0, 1.0, 0.5, 0.75, 0.0];
        let p = SampledPath::new(
            0.0,
            0.25,
            values,
            crate::paths::PathMeta { beta: 2.0, kind: PathKind::Excursion },
        )
        .unwrap();
        let set = level_set(&p, 0.5).unwrap();
        assert_eq!(set.intervals().len(), 2);
        let (i1, i2) = (set.intervals()[0], set.intervals()[1]);
        assert_eq!(i1.1, i2.0, "components touch at the grazing point");
        assert_eq!(i1.1, 0.5);
        // the grazing point itself is not in the open set
        assert!(!set.contains(0.5));
        assert!(set.contains(0.4));
    }

    #[test]
    fn ranked_lengths_basics() {
        let set = OpenSet::from_intervals(vec![(0.0f64, 0.2), (0.5, 0.6)]).unwrap();
        let r = ranked_lengths(&set);
        assert!((r.get(0) - 0.2).abs() < 1e-15);
        assert!((r.get(1) - 0.1).abs() < 1e-15);
        assert_eq!(r.get(2), 0.0);
        assert!(ranked_lengths(&OpenSet::<f64>::empty()).is_empty());
        let unit = OpenSet::from_intervals(vec![(0.0f64, 1.0)]).unwrap();
        assert_eq!(ranked_lengths(&unit).masses(), &[1.0]);
        assert!(OpenSet::from_intervals(vec![(0.5f64, 0.2)]).is_err());
        assert!(OpenSet::from_intervals(vec![(0.0f64, 0.5), (0.3, 0.8)]).is_err());
    }

    #[test]
    fn tent_extinction_last_fragment_snapshot() {
        let (zeta, x_star) = extinction(&tent()).unwrap();
        assert_eq!((zeta, x_star), (1.0, 0.5));

        let ((a, b), len) = last_fragment(&tent(), 0.5).unwrap();
        assert_eq!((a, b), (0.25, 0.75));
        assert_eq!(len, 0.5);
        let ((a0, b0), len0) = last_fragment(&tent(), 0.0).unwrap();
        assert_eq!(((a0, b0), len0), ((0.0, 1.0), 1.0));
        assert!(last_fragment(&tent(), 1.0).is_err());

        // rescale: O(0.75) = {2x > 0.75} ∪ … = (0.375, 0.625), recentred
        // at 0.5 and stretched by t^{-2} = 16 → (−2, 2)
        let snap = rescaled_snapshot(&tent(), 0.25, -0.5).unwrap();
        assert_eq!(snap.intervals().len(), 1);
        let (sa, sb) = snap.intervals()[0];
        assert!((sa + 2.0).abs() < 1e-12 && (sb - 2.0).abs() < 1e-12, "({sa},{sb})");
        assert!((snap.total_length() - 0.25 * 16.0).abs() < 1e-12);
        assert!(snap.contains(0.0), "0 is interior to the snapshot");
        assert!(rescaled_snapshot(&tent(), 1.5, -0.5).is_err());
    }

    #[test]
    fn snapshot_total_length_is_affine() {
        let e: SampledPath<f64> = sample_brownian_excursion(2048, 3).unwrap();
        let (zeta, _) = extinction(&e).unwrap();
        let t = 0.3 * zeta;
        let snap = rescaled_snapshot(&e, t, -0.5).unwrap();
        let raw = level_set(&e, zeta - t).unwrap();
        let scale = t.powf(-2.0);
        assert!(
            (snap.total_length() - raw.total_length() * scale).abs()
                < 1e-9 * raw.total_length() * scale
        );
        assert!(snap.contains(0.0));
    }

    #[test]
    fn tagged_fragment_tent() {
        assert_eq!(tagged_fragment(&tent(), 0.5, 0.5).unwrap(), 0.5);
        assert_eq!(tagged_fragment(&tent(), 0.5, 0.0).unwrap(), 1.0);
        // tag outside every fragment once the level exceeds its height
        assert_eq!(tagged_fragment(&tent(), 0.1, 0.5).unwrap(), 0.0);
        assert!(tagged_fragment(&tent(), 0.0, 0.5).is_err());
    }

    #[test]
    fn tagged_fragment_monotone_in_level() {
        let e: SampledPath<f64> = sample_brownian_excursion(1024, 11).unwrap();
        let u = 0.37;
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let t = i as f64 * 0.02;
            let len = tagged_fragment(&e, u, t).unwrap();
            assert!(len <= prev + 1e-15, "tagged length grew at level {t}");
            prev = len;
        }
    }

    #[test]
    fn trajectory_refines_and_matches_single_level() {
        let tent = tent();
        let levels = vec![0.0, 0.5];
        let traj = fragmentation_trajectory(&tent, &levels).unwrap();
        assert_eq!(traj[0].masses(), &[1.0]);
        assert_eq!(traj[1].masses(), &[0.5]);
        assert!(fragmentation_trajectory(&tent, &[0.5, 0.1]).is_err());

        let e: SampledPath<f64> = sample_brownian_excursion(2048, 21).unwrap();
        let single = fragmentation_trajectory(&e, &[0.2]).unwrap();
        let direct = ranked_lengths(&level_set(&e, 0.2).unwrap());
        assert_eq!(single[0], direct);
    }

    #[test]
    fn nesting_and_mass_accounting() {
        for seed in 0..1000u64 {
            let e: SampledPath<f64> = sample_brownian_excursion(256, seed).unwrap();
            let (zeta, _) = extinction(&e).unwrap();
            let mut prev: Option<OpenSet<f64>> = None;
            for i in 0..50 {
                let t = zeta * i as f64 / 50.0;
                let set = level_set(&e, t).unwrap();
                let ranked = ranked_lengths(&set);
                let leb = measure_above(&e, t);
                assert!(
                    (ranked.sum() - leb).abs() <= 1e-12 * leb.max(1.0),
                    "mass accounting at level {t}"
                );
                if let Some(coarser) = &prev {
                    assert!(set.nested_in(coarser), "nesting violated at level {t}");
                }
                prev = Some(set);
            }
        }
    }

    #[test]
    fn conservation_at_level_zero() {
        let mut checked = 0;
        for seed in 0..50u64 {
            let e: SampledPath<f64> = sample_brownian_excursion(512, seed).unwrap();
            if e.values[1..512].iter().all(|&v| v > 0.0) {
                let r = ranked_lengths(&level_set(&e, 0.0).unwrap());
                assert!((r.sum() - 1.0).abs() < 1e-12);
                assert_eq!(r.len(), 1);
                checked += 1;
            }
        }
        assert!(checked > 40, "almost all paths are interior-positive");
    }

    #[test]
    fn monotone_rescale_of_extinction() {
        let e: SampledPath<f64> = sample_brownian_excursion(512, 5).unwrap();
        let (zeta, x_star) = extinction(&e).unwrap();
        let scaled = SampledPath::new(
            e.t0,
            e.dt,
            e.values.iter().map(|&v| 2.5 * v).collect(),
            e.meta,
        )
        .unwrap();
        let (z2, x2) = extinction(&scaled).unwrap();
        assert!((z2 - 2.5 * zeta).abs() < 1e-12);
        assert_eq!(x2, x_star);
    }

    #[test]
    fn last_fragment_length_nonincreasing() {
        for seed in 0..1000u64 {
            let e: SampledPath<f64> = sample_brownian_excursion(256, 40_000 + seed).unwrap();
            let (zeta, _) = extinction(&e).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..50 {
                let t = zeta * i as f64 / 50.0;
                let (_, len) = last_fragment(&e, t).unwrap();
                assert!(len <= prev + 1e-15);
                prev = len;
            }
        }
    }

    #[test]
    fn first_split_follows_the_dislocation_density() {
        // the larger-child relative mass at the first split of the block
        // containing the argmax, against the binary split density on a
        // trimmed window (grid resolution crowds the x → 1 endpoint)
        let paths = 10_000;
        let grid = 4096;
        let mut xs = Vec::new();
        for seed in 0..paths {
            let e: SampledPath<f64> = sample_brownian_excursion(grid, 90_000 + seed).unwrap();
            // lowest strict interior local minimum
            let v = &e.values;
            let mut best: Option<(usize, f64)> = None;
            for i in 1..grid {
                if v[i] > 0.0 && v[i] < v[i - 1] && v[i] <= v[i + 1] {
                    if best.map_or(true, |(_, bv)| v[i] < bv) {
                        best = Some((i, v[i]));
                    }
                }
            }
            let Some((_, split_level)) = best else { continue };
            let parent = level_set(&e, split_level - 1e-12).unwrap();
            let children = level_set(&e, split_level + 1e-12).unwrap();
            let (zeta, x_star) = extinction(&e).unwrap();
            if split_level >= zeta {
                continue;
            }
            let p = parent.component_containing(x_star).unwrap();
            let kids: Vec<(f64, f64)> = children
                .intervals()
                .iter()
                .copied()
                .filter(|&(a, b)| a >= p.0 - 1e-9 && b <= p.1 + 1e-9)
                .collect();
            if kids.len() != 2 {
                continue; // grazing/degenerate split at grid resolution
            }
            let l1 = kids[0].1 - kids[0].0;
            let l2 = kids[1].1 - kids[1].0;
            xs.push(l1.max(l2) / (l1 + l2));
        }
        // bin over [0.5, 0.95] and compare against the normalized density
        let (lo, hi, nbins) = (0.5, 0.95, 9);
        let kept: Vec<f64> = xs.iter().copied().filter(|&x| (lo..hi).contains(&x)).collect();
        assert!(kept.len() > 500, "too few in-window splits: {}", kept.len());
        let mut observed = vec![0.0f64; nbins];
        for &x in &kept {
            let b = (((x - lo) / (hi - lo) * nbins as f64) as usize).min(nbins - 1);
            observed[b] += 1.0;
        }
        let weights: Vec<f64> = (0..nbins)
            .map(|b| {
                let a = lo + (hi - lo) * b as f64 / nbins as f64;
                let c = lo + (hi - lo) * (b + 1) as f64 / nbins as f64;
                crate::analytics::quad::integrate(
                    |x: f64| brownian_dislocation_density(x),
                    a,
                    c,
                    1e-10,
                )
                .value
            })
            .collect();
        let wsum: f64 = weights.iter().sum();
        let expected: Vec<f64> =
            weights.iter().map(|w| w / wsum * kept.len() as f64).collect();
        let p = stats::chi_square_pvalue(&observed, &expected);
        assert!(p > 0.01, "chi-square p = {p}, observed {observed:?} expected {expected:?}");
    }
}
