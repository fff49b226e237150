use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fockgen::grid::GridSpec;
use serde::{Deserialize, Serialize};

use crate::verify::{CATALOG, SUITES};
use crate::CliError;

/// Everything a run depends on. A fixed config and seed reproduce a run
/// byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(rename = "K")]
    pub max_particles: usize,
    /// Suite names; empty selects every suite.
    pub suites: Vec<String>,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::new(1, 64, 0.25, 1.0),
            max_particles: 2,
            suites: Vec::new(),
            tolerance_overrides: BTreeMap::new(),
            output_dir: PathBuf::from("fockgen-out"),
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(CliError::Config(format!("unknown suite {s:?} (known: {})", SUITES.join(", "))));
            }
        }
        for (name, tol) in &self.tolerance_overrides {
            if !CATALOG.iter().any(|c| c.name == name) {
                return Err(CliError::Config(format!("override names unknown check {name:?}")));
            }
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(CliError::Config(format!("override for {name} must be a finite nonnegative number")));
            }
        }
        Ok(())
    }

    pub fn selected_suites(&self) -> Vec<&'static str> {
        SUITES.iter().copied().filter(|s| self.suites.is_empty() || self.suites.iter().any(|x| x == s)).collect()
    }
}

/// Parses `check=tolerance`.
pub fn parse_override(text: &str) -> Result<(String, f64), CliError> {
    let (name, tol) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {text:?} is not of the form check=tolerance")))?;
    let tol: f64 = tol
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("override {text:?}: tolerance is not a number")))?;
    Ok((name.trim().to_string(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(c.validate().is_ok());
        assert_eq!(c.selected_suites(), SUITES.to_vec());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"K": 0, "seed": 3}"#).unwrap();
        assert_eq!(c.max_particles, 0);
        assert_eq!(c.seed, 3);
        assert_eq!(c.grid, RunConfig::default().grid);
    }

    #[test]
    fn rejects_unknown_names() {
        let mut c = RunConfig { suites: vec!["nope".into()], ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        c.suites.clear();
        c.tolerance_overrides.insert("nope".into(), 1.0);
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn override_syntax() {
        assert_eq!(parse_override("heisenberg_weyl=1e-30").unwrap(), ("heisenberg_weyl".into(), 1e-30));
        assert!(parse_override("heisenberg_weyl").is_err());
        assert!(parse_override("x=abc").is_err());
    }
}
