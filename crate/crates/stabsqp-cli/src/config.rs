//! Experiment configuration: a single JSON file selecting an instance, solver
//! options, a seed, and per-experiment parameters. Unspecified sections fall
//! back to defaults, so a minimal config is just `{"instance": {...}}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use stabsqp::instances::InstanceSpec;
use stabsqp::SolverOptions;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub solver: SolverOptions,
    pub seed: u64,
    pub solve: SolveConfig,
    pub rate_study: RateStudyConfig,
    pub error_bound: ErrorBoundConfig,
    pub contrast: ContrastConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSpec::ScalarToy,
            solver: SolverOptions::default(),
            seed: 0,
            solve: SolveConfig::default(),
            rate_study: RateStudyConfig::default(),
            error_bound: ErrorBoundConfig::default(),
            contrast: ContrastConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Explicit start point; overrides `start_radius`.
    pub start: Option<StartPoint>,
    /// Seeded perturbation radius around the reference KKT point. With
    /// neither field set, the solve starts at the reference itself (or the
    /// origin when the instance has no reference).
    pub start_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPoint {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateStudyConfig {
    /// Start radii, strictly positive and strictly decreasing.
    pub radii: Vec<f64>,
    /// Perturbed starts per radius.
    pub samples: usize,
}

impl Default for RateStudyConfig {
    fn default() -> Self {
        Self {
            radii: vec![1e-2, 1e-3],
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorBoundConfig {
    pub radius: f64,
    pub samples: usize,
    /// Largest acceptable max/min ratio spread.
    pub max_spread: f64,
}

impl Default for ErrorBoundConfig {
    fn default() -> Self {
        Self {
            radius: 1e-3,
            samples: 100,
            max_spread: 1e4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContrastConfig {
    /// Start radius around the reference for both methods.
    pub start_radius: f64,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        Self { start_radius: 1e-2 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| format!("config {}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.rate_study.radii.is_empty() {
            return Err("rate_study.radii must be nonempty".into());
        }
        for w in self.rate_study.radii.windows(2) {
            if !(w[1] < w[0]) {
                return Err(format!(
                    "rate_study.radii must be strictly decreasing, got {:?}",
                    self.rate_study.radii
                ));
            }
        }
        if self.rate_study.radii.iter().any(|&r| !(r > 0.0)) {
            return Err("rate_study.radii must be positive".into());
        }
        if self.rate_study.samples == 0 {
            return Err("rate_study.samples must be positive".into());
        }
        if !(self.error_bound.radius > 0.0) {
            return Err(format!(
                "error_bound.radius must be positive, got {}",
                self.error_bound.radius
            ));
        }
        if self.error_bound.samples < 10 {
            return Err(format!(
                "error_bound.samples must be at least 10, got {}",
                self.error_bound.samples
            ));
        }
        if !(self.error_bound.max_spread > 0.0) {
            return Err("error_bound.max_spread must be positive".into());
        }
        if !(self.contrast.start_radius > 0.0) {
            return Err("contrast.start_radius must be positive".into());
        }
        if let Some(r) = self.solve.start_radius {
            if !(r > 0.0) {
                return Err(format!("solve.start_radius must be positive, got {r}"));
            }
        }
        Ok(())
    }

    /// Short hex digest of the effective (post-default, post-override)
    /// configuration; stamped on every report row.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..12].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.hash().len(), 12);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            seed: 1,
            ..Default::default()
        };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = ExperimentConfig::default();
        cfg.rate_study.radii = vec![1e-3, 1e-2];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.error_bound.samples = 5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.error_bound.radius = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn minimal_json_parses_with_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"instance": {"family": "obstacle1d", "n": 32}}"#).unwrap();
        assert_eq!(cfg.instance, InstanceSpec::Obstacle1d { n: 32 });
        assert_eq!(cfg.rate_study.samples, 20);
    }
}
