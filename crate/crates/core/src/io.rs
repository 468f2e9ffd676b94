//! File formats: paths as CSV with a JSON metadata sidecar, and
//! fragmentation snapshots as JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragmentation::{OpenSet, RankedMasses};
use crate::limits::{EtaCurve, HInfinitySample, Truncation};
use crate::paths::{PathKind, PathMeta, SampledPath};
use crate::rng::Seed;

/// Sidecar metadata stored next to a path CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSidecar {
    pub beta: f64,
    pub kind: PathKind,
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
    pub seed: Option<Seed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_minus: Option<EtaCurve<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_plus: Option<EtaCurve<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
}

fn csv_path(base: &Path) -> PathBuf {
    base.with_extension("csv")
}

fn sidecar_path(base: &Path) -> PathBuf {
    base.with_extension("json")
}

/// Writes `{base}.csv` (header `x,value`, 17 significant digits) and
/// `{base}.json`.
pub fn write_path(path: &SampledPath<f64>, seed: Option<Seed>, base: &Path) -> Result<()> {
    write_path_with_eta(path, seed, None, base)
}

/// Same scheme for a limit-function sample; the passage curves ride in
/// the sidecar.
pub fn write_h_infinity(sample: &HInfinitySample<f64>, seed: Option<Seed>, base: &Path) -> Result<()> {
    write_path_with_eta(
        &sample.path,
        seed,
        Some((sample.eta_minus.clone(), sample.eta_plus.clone(), sample.truncation)),
        base,
    )
}

fn write_path_with_eta(
    path: &SampledPath<f64>,
    seed: Option<Seed>,
    eta: Option<(EtaCurve<f64>, EtaCurve<f64>, Truncation)>,
    base: &Path,
) -> Result<()> {
    let mut csv = String::with_capacity(path.values.len() * 48);
    csv.push_str("x,value\n");
    for (i, v) in path.values.iter().enumerate() {
        let x = path.t0 + path.dt * i as f64;
        csv.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    let mut f = fs::File::create(csv_path(base))?;
    f.write_all(csv.as_bytes())?;

    let (eta_minus, eta_plus, truncation) = match eta {
        Some((m, p, t)) => (Some(m), Some(p), Some(t)),
        None => (None, None, None),
    };
    let sidecar = PathSidecar {
        beta: path.meta.beta,
        kind: path.meta.kind,
        t0: path.t0,
        dt: path.dt,
        n: path.grid_len(),
        seed,
        eta_minus,
        eta_plus,
        truncation,
    };
    fs::write(sidecar_path(base), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Reads a path back from its CSV + sidecar pair.
pub fn read_path(base: &Path) -> Result<(SampledPath<f64>, PathSidecar)> {
    let sidecar: PathSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(base))?)?;
    let csv = fs::read_to_string(csv_path(base))?;
    let mut lines = csv.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty csv".into()))?;
    if header.trim() != "x,value" {
        return Err(Error::Parse(format!("unexpected header '{header}'")));
    }
    let mut values = Vec::with_capacity(sidecar.n + 1);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("row {i} is not 'x,value'")))?;
        values.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {i}: {e}")))?,
        );
    }
    if values.len() != sidecar.n + 1 {
        return Err(Error::Parse(format!(
            "expected {} rows, found {}",
            sidecar.n + 1,
            values.len()
        )));
    }
    let path = SampledPath::new(
        sidecar.t0,
        sidecar.dt,
        values,
        PathMeta { beta: sidecar.beta, kind: sidecar.kind },
    )?;
    Ok((path, sidecar))
}

/// One fragmentation snapshot, serialized as
/// `{level, intervals: [[a,b],…], ranked: […]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotJson {
    pub level: f64,
    pub intervals: Vec<[f64; 2]>,
    pub ranked: Vec<f64>,
}

impl SnapshotJson {
    pub fn new(level: f64, set: &OpenSet<f64>, ranked: &RankedMasses<f64>) -> Self {
        SnapshotJson {
            level,
            intervals: set.intervals().iter().map(|&(a, b)| [a, b]).collect(),
            ranked: ranked.masses().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragmentation::{level_set, ranked_lengths};
    use crate::paths::sample_brownian_excursion;

    #[test]
    fn path_round_trip() {
        let dir = std::env::temp_dir().join("fragsim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let base = dir.join("excursion");
        let e: SampledPath<f64> = sample_brownian_excursion(256, 9).unwrap();
        write_path(&e, Some(9), &base).unwrap();
        let (back, sidecar) = read_path(&base).unwrap();
        assert_eq!(back.values, e.values);
        assert_eq!(back.meta.kind, PathKind::Excursion);
        assert_eq!(sidecar.seed, Some(9));
        assert_eq!(sidecar.n, 256);
        // 17 significant digits survive the text round trip bit-exactly
        assert_eq!(back.dt, e.dt);
    }

    #[test]
    fn snapshot_json_round_trip() {
        let e: SampledPath<f64> = sample_brownian_excursion(256, 10).unwrap();
        let set = level_set(&e, 0.3).unwrap();
        let ranked = ranked_lengths(&set);
        let snap = SnapshotJson::new(0.3, &set, &ranked);
        let json = serde_json::to_string(&snap).unwrap();
        let back: SnapshotJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.intervals, snap.intervals);
        assert_eq!(back.ranked, snap.ranked);
        assert_eq!(back.level, 0.3);
    }
}
