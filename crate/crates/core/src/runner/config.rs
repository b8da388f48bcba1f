//! Suite configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::PatternSpecId;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 20;
pub const DEFAULT_GRID_RANGE_US: (f64, f64) = (1.0, 150.0);
pub const DEFAULT_MAP_TAU_US: f64 = 75.0;

/// JSON suite description. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub device: PathBuf,
    pub patterns: Vec<PatternSpecId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid_us: Option<Vec<f64>>,
    pub shots: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_tau_us: Option<f64>,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = SuiteConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.device.is_relative() {
            cfg.device = base.join(&cfg.device);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.patterns.is_empty() {
            return Err(Error::field("patterns", "at least one pattern is required"));
        }
        if self.shots == 0 {
            return Err(Error::field("shots", "must be positive"));
        }
        if let Some(grid) = &self.tau_grid_us {
            if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(Error::field("tau_grid_us", "needs finite values >= 0"));
            }
        }
        Ok(())
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        self.tau_grid_us.clone().unwrap_or_else(default_tau_grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Log-spaced delays between 1 and 150 us.
pub fn default_tau_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_RANGE_US.0, DEFAULT_GRID_RANGE_US.1, DEFAULT_GRID_POINTS)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_defaults() {
        let cfg = SuiteConfig::parse(
            r#"{"device": "d.json", "patterns": ["blank_one", "active.A.n10"], "shots": 100, "seed": 3, "output_dir": "out"}"#,
        )
        .unwrap();
        let grid = cfg.tau_grid();
        assert_eq!(grid.len(), 20);
        assert!((grid[0] - 1.0).abs() < 1e-12 && (grid[19] - 150.0).abs() < 1e-9);
        assert!(SuiteConfig::parse(r#"{"device": "d", "patterns": ["nope"], "shots": 1, "seed": 0, "output_dir": "o"}"#).is_err());
        assert!(matches!(
            SuiteConfig::parse(r#"{"device": "d", "patterns": [], "shots": 1, "seed": 0, "output_dir": "o"}"#),
            Err(Error::InvalidField { .. })
        ));
    }
}
