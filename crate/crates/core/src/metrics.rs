//! Metric-space machinery for comparing open sets and ranked sequences:
//! the distance-to-complement function χ, the Hausdorff distance on
//! unions of closed intervals, the weighted series distance on bounded
//! open sets, and the ℓ¹ distance on ranked masses.

use crate::error::{Error, Result};
use crate::fragmentation::{OpenSet, RankedMasses};
use crate::scalar::Real;

/// Distance from x to the closed complement of the set; zero outside.
pub fn chi<T: Real>(set: &OpenSet<T>, x: T) -> T {
    match set.component_containing(x) {
        Some((a, b)) => {
            let left = x - a;
            let right = b - x;
            if left < right {
                left
            } else {
                right
            }
        }
        None => T::zero(),
    }
}

/// A finite union of closed intervals, sorted; entries may be single
/// points (a == b).
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedIntervals<T> {
    parts: Vec<(T, T)>,
}

impl<T: Real> ClosedIntervals<T> {
    pub fn new(parts: Vec<(T, T)>) -> Result<Self> {
        for p in &parts {
            if !(p.0 <= p.1) {
                return Err(Error::invalid("closed intervals need a <= b"));
            }
        }
        for w in parts.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::invalid("closed intervals must be sorted and separated"));
            }
        }
        Ok(ClosedIntervals { parts })
    }

    pub fn parts(&self) -> &[(T, T)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Distance from a point to the union.
    pub fn distance(&self, x: T) -> T {
        debug_assert!(!self.parts.is_empty());
        let idx = self.parts.partition_point(|&(a, _)| a <= x);
        let mut best = T::infinity();
        if idx > 0 {
            let (a, b) = self.parts[idx - 1];
            if x <= b {
                return T::zero();
            }
            best = x - b;
            let _ = a;
        }
        if idx < self.parts.len() {
            let d = self.parts[idx].0 - x;
            if d < best {
                best = d;
            }
        }
        best
    }
}

/// The closed complement of (set ∩ (−k, k)) within [−k, k]; never empty
/// since ±k always belong to it.
pub fn clipped_complement<T: Real>(set: &OpenSet<T>, k: T) -> ClosedIntervals<T> {
    let mut parts: Vec<(T, T)> = Vec::new();
    let mut cursor = -k;
    for &(a, b) in set.intervals() {
        let a = if a < -k { -k } else { a };
        let b = if b > k { k } else { b };
        if a >= b {
            continue; // clipped away
        }
        if cursor <= a {
            parts.push((cursor, a));
        }
        cursor = b;
    }
    if cursor <= k {
        parts.push((cursor, k));
    }
    // merge any touching artifacts from clipping
    let mut merged: Vec<(T, T)> = Vec::with_capacity(parts.len());
    for p in parts {
        match merged.last_mut() {
            Some(last) if last.1 >= p.0 => last.1 = p.1,
            _ => merged.push(p),
        }
    }
    ClosedIntervals { parts: merged }
}

/// Hausdorff distance between two non-empty unions of closed intervals,
/// exact: the sup of the distance function is attained at interval
/// endpoints or at gap midpoints of the other set.
pub fn hausdorff<T: Real>(a: &ClosedIntervals<T>, b: &ClosedIntervals<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hausdorff distance needs non-empty sets"));
    }
    Ok(if directed(a, b) > directed(b, a) { directed(a, b) } else { directed(b, a) })
}

fn directed<T: Real>(a: &ClosedIntervals<T>, b: &ClosedIntervals<T>) -> T {
    let mut sup = T::zero();
    let mut push = |d: T| {
        if d > sup {
            sup = d;
        }
    };
    for &(x, y) in a.parts() {
        push(b.distance(x));
        push(b.distance(y));
    }
    for w in b.parts().windows(2) {
        let mid = (w[0].1 + w[1].0) / T::lit(2.0);
        // the distance function peaks at gap midpoints; relevant only if
        // the midpoint is covered by `a`
        if a.distance(mid) == T::zero() {
            push(b.distance(mid));
        }
    }
    sup
}

/// The weighted open-set distance: Σ_k 2^{−k} d_H of the clipped
/// complements, truncated at `k_max`, together with the certified bound
/// on the dropped tail (each term is at most the diameter 2k).
pub fn d_open<T: Real>(a: &OpenSet<T>, b: &OpenSet<T>, k_max: usize) -> (T, T) {
    assert!(k_max >= 1);
    let mut value = T::zero();
    for k in 1..=k_max {
        let kt = T::from_usize(k).unwrap();
        let ca = clipped_complement(a, kt);
        let cb = clipped_complement(b, kt);
        let dh = hausdorff(&ca, &cb).expect("clipped complements contain ±k");
        value += T::lit(0.5f64.powi(k as i32)) * dh;
    }
    let tail = T::lit(2.0 * 0.5f64.powi(k_max as i32) * (k_max as f64 + 2.0));
    (value, tail)
}

/// ℓ¹ distance on ranked masses, the shorter sequence zero-padded.
pub fn d_ranked<T: Real>(a: &RankedMasses<T>, b: &RankedMasses<T>) -> T {
    let n = a.len().max(b.len());
    (0..n).map(|i| (a.get(i) - b.get(i)).abs()).sum()
}
