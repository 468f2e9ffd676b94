use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Extinction,
    LastFragment,
    TotalMass,
    LogAsymptotics,
    Validation,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "extinction" => ExperimentKind::Extinction,
            "last_fragment" | "last-fragment" => ExperimentKind::LastFragment,
            "total_mass" | "total-mass" => ExperimentKind::TotalMass,
            "log_asymptotics" | "log-asymptotics" => ExperimentKind::LogAsymptotics,
            "validation" => ExperimentKind::Validation,
            other => return Err(Error::invalid(format!("unknown experiment '{other}'"))),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub beta: f64,
    pub trials: usize,
    pub grid_n: usize,
    /// levels below the extinction time, strictly descending
    pub t_list: Vec<f64>,
    pub seed: Seed,
    pub out_path: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0 && self.beta <= 2.0) {
            return Err(Error::invalid(format!("beta must lie in (1, 2], got {}", self.beta)));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.grid_n < 2 {
            return Err(Error::invalid("grid_n must be at least 2"));
        }
        if self.t_list.is_empty() && self.experiment != ExperimentKind::Validation {
            return Err(Error::invalid("t_list must not be empty"));
        }
        if self.t_list.iter().any(|&t| t <= 0.0) {
            return Err(Error::invalid("levels must be positive"));
        }
        if self.t_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("t_list must be strictly descending"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.beta - 1.0
    }

    /// Expected path oscillation over one grid cell near the peak; levels
    /// far below 50 of these drown in discretization.
    pub fn grid_oscillation(&self) -> f64 {
        (1.0 / self.grid_n as f64).powf(1.0 - 1.0 / self.beta)
    }

    pub fn discretization_warnings(&self) -> Vec<String> {
        let osc = self.grid_oscillation();
        self.t_list
            .iter()
            .filter(|&&t| t < 50.0 * osc)
            .map(|&t| {
                format!(
                    "level t = {t} is under 50 grid oscillations ({:.2e}); \
                     expect visible discretization bias",
                    osc
                )
            })
            .collect()
    }
}

/// Grid heuristic: resolve the smallest level's fragments with roughly
/// 16 cells (mass scale t^{β/(β−1)}), rounded up to a power of two.
pub fn suggested_grid(beta: f64, t_min: f64) -> usize {
    let cells = 16.0 * t_min.powf(-beta / (beta - 1.0));
    let capped = cells.clamp(1024.0, 16_777_216.0);
    1usize << (capped.log2().ceil() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rule_matches_hand_values() {
        // β = 2: 16/t²; t = 0.02 → 40 000 → 2^16
        assert_eq!(suggested_grid(2.0, 0.02), 65_536);
        // β = 1.5: 16/t³; t = 0.05 → 128 000 → 2^17
        assert_eq!(suggested_grid(1.5, 0.05), 131_072);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = ExperimentConfig {
            experiment: ExperimentKind::Extinction,
            beta: 2.0,
            trials: 10,
            grid_n: 1024,
            t_list: vec![0.1, 0.05],
            seed: 1,
            out_path: None,
        };
        assert!(c.validate().is_ok());
        c.t_list = vec![0.05, 0.1];
        assert!(c.validate().is_err());
        c.t_list = vec![0.1, 0.05];
        c.beta = 2.5;
        assert!(c.validate().is_err());
        c.beta = 2.0;
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn warning_fires_for_tiny_levels() {
        let c = ExperimentConfig {
            experiment: ExperimentKind::Extinction,
            beta: 2.0,
            trials: 10,
            grid_n: 256,
            t_list: vec![0.01],
            seed: 1,
            out_path: None,
        };
        assert!(!c.discretization_warnings().is_empty());
    }
}
