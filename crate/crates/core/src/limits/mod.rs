//! Limit objects near the extinction time: the two-sided function H∞
//! whose unit sub-level set is the limit fragmentation, its passage
//! processes η±, and samplers for both the Brownian (glued Bessel(3))
//! and stable (truncated Poisson gluing) cases.

pub mod brownian;
pub mod stable;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragmentation::{polyline_sub_level, ranked_lengths, OpenSet, RankedMasses};
use crate::paths::{PathKind, SampledPath};
use crate::scalar::Real;

pub use brownian::{
    sample_h_infinity_brownian, sample_limit_masses_brownian, sample_passage_pair_brownian,
    BrownianLimitSample,
};
pub use stable::{
    default_r_min, sample_h_infinity_stable, sample_stable_eta_curves, PoissonAtom,
    StableEtaSample,
};

/// Truncation parameters a sample was built with.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Truncation {
    /// levels above this are not represented
    pub m_cap: f64,
    /// atoms with local time below this were dropped (0 = none)
    pub r_min: f64,
}

/// How an η curve interpolates between its knots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaInterp {
    /// piecewise linear in the level (continuous passage curves)
    Linear,
    /// right-continuous steps (Poisson-glued curves jump at atom levels)
    Step,
}

/// First-passage curve m ↦ η(m), nondecreasing, on levels up to a cap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaCurve<T> {
    pub interp: EtaInterp,
    /// (level, passage) knots, ascending in both coordinates
    pub knots: Vec<(T, T)>,
}

impl<T: Real> EtaCurve<T> {
    pub fn level_cap(&self) -> T {
        self.knots.last().map(|&(m, _)| m).unwrap_or_else(T::zero)
    }

    /// η(m); None when the level is beyond the represented cap.
    pub fn eval(&self, m: T) -> Option<T> {
        if !(m > T::zero()) || self.knots.is_empty() || m > self.level_cap() {
            return None;
        }
        let idx = self.knots.partition_point(|&(lvl, _)| lvl < m);
        match self.interp {
            EtaInterp::Step => {
                // value accumulated by atoms at levels <= m
                let below = if idx < self.knots.len() && self.knots[idx].0 == m {
                    idx + 1
                } else {
                    idx
                };
                Some(if below == 0 { T::zero() } else { self.knots[below - 1].1 })
            }
            EtaInterp::Linear => {
                if idx == 0 {
                    return Some(self.knots[0].1);
                }
                if idx >= self.knots.len() {
                    return Some(self.knots.last().unwrap().1);
                }
                let (m0, x0) = self.knots[idx - 1];
                let (m1, x1) = self.knots[idx];
                if m1 == m0 {
                    return Some(x1);
                }
                Some(x0 + (x1 - x0) * (m - m0) / (m1 - m0))
            }
        }
    }
}

/// A sampled two-sided limit function with its passage curves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HInfinitySample<T> {
    /// grid path on [−η⁻(cap), η⁺(cap)], kind HInfinity, value 0 at x = 0
    pub path: SampledPath<T>,
    pub eta_minus: EtaCurve<T>,
    pub eta_plus: EtaCurve<T>,
    pub truncation: Truncation,
}

impl<T: Real> HInfinitySample<T> {
    /// Builds a sample from an explicit two-sided path by scanning its
    /// one-sided running maxima; the passage curves are exact on the
    /// interpolant. Used for deterministic test paths and by the
    /// Brownian sampler.
    pub fn from_path(path: SampledPath<T>) -> Result<Self> {
        if path.meta.kind != PathKind::HInfinity {
            return Err(Error::invalid("expected an h-infinity path"));
        }
        if !(path.x_start() < T::zero() && path.x_end() > T::zero()) {
            return Err(Error::invalid("domain must contain 0"));
        }
        let zero_idx = (-path.x_start() / path.dt).round().to_usize().unwrap();
        let eta_plus = scan_passages(&path, zero_idx, true);
        let eta_minus = scan_passages(&path, zero_idx, false);
        let m_cap = eta_plus
            .level_cap()
            .min(eta_minus.level_cap())
            .as_f64();
        Ok(HInfinitySample {
            path,
            eta_minus,
            eta_plus,
            truncation: Truncation { m_cap, r_min: 0.0 },
        })
    }

    /// η(m) = η⁻(m) + η⁺(m).
    pub fn eta_total(&self, m: T) -> Option<T> {
        Some(self.eta_minus.eval(m)? + self.eta_plus.eval(m)?)
    }
}

/// Corner skeleton of the one-sided running maximum: exact first-passage
/// positions of every represented level on the linear interpolant.
fn scan_passages<T: Real>(path: &SampledPath<T>, zero_idx: usize, forward: bool) -> EtaCurve<T> {
    let v = &path.values;
    let mut knots: Vec<(T, T)> = Vec::new();
    let mut running = v[zero_idx];
    let n = v.len();
    let mut steps = 0usize;
    loop {
        steps += 1;
        let (prev, cur) = if forward {
            if zero_idx + steps >= n {
                break;
            }
            (zero_idx + steps - 1, zero_idx + steps)
        } else {
            if steps > zero_idx {
                break;
            }
            (zero_idx - steps + 1, zero_idx - steps)
        };
        if v[cur] > running {
            // the passage of levels in (running, v[cur]] happens inside
            // this cell, linearly between the previous value and v[cur]
            let x_prev = path.t0 + path.dt * T::from_usize(prev).unwrap();
            let x_cur = path.t0 + path.dt * T::from_usize(cur).unwrap();
            let (lo, hi) = (v[prev].max(running), v[cur]);
            let cross_at = |lvl: T| {
                let w = (lvl - v[prev]) / (v[cur] - v[prev]);
                let x = x_prev + (x_cur - x_prev) * w;
                if forward {
                    x
                } else {
                    -x
                }
            };
            knots.push((lo, cross_at(lo)));
            knots.push((hi, cross_at(hi)));
            running = v[cur];
        }
    }
    // deduplicate identical consecutive levels
    knots.dedup_by(|b, a| b.0 == a.0 && b.1 == a.1);
    EtaCurve { interp: EtaInterp::Linear, knots }
}

/// First-passage positions (η⁻(m), η⁺(m)).
pub fn eta_at<T: Real>(sample: &HInfinitySample<T>, m: T) -> Result<(T, T)> {
    if !(m > T::zero()) {
        return Err(Error::invalid("level must be positive"));
    }
    match (sample.eta_minus.eval(m), sample.eta_plus.eval(m)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::DomainExceeded(format!(
            "level {m} beyond the represented cap {}",
            sample.truncation.m_cap
        ))),
    }
}

/// The limit fragmentation: {x : H∞(x) < 1} of the interpolant and its
/// ranked component lengths.
pub fn limit_fragmentation<T: Real>(
    sample: &HInfinitySample<T>,
) -> Result<(OpenSet<T>, RankedMasses<T>)> {
    if sample.truncation.m_cap < 1.0 {
        return Err(Error::DomainExceeded(format!(
            "sample only covers levels up to {}",
            sample.truncation.m_cap
        )));
    }
    let path = &sample.path;
    let pts = path
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (path.t0 + path.dt * T::from_usize(i).unwrap(), v));
    let set = polyline_sub_level(pts, T::one());
    let ranked = ranked_lengths(&set);
    Ok((set, ranked))
}
