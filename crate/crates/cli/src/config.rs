use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ergopt::verify::Ranges;
use serde::Deserialize;

/// TOML equivalents of the command-line flags; flags given on the command
/// line win.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub float: Option<bool>,
    pub timing: Option<bool>,
    pub norm: OutputOnly,
    pub maximize: MaximizeConfig,
    pub normal_form: OutputOnly,
    pub perturb: PerturbConfig,
    pub lockin: LockinConfig,
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputOnly {
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct MaximizeConfig {
    pub oracle_period: Option<usize>,
    pub csv: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PerturbConfig {
    pub epsilon: Option<String>,
    pub k: Option<usize>,
    pub truncation_depth: Option<usize>,
    pub table_limit: Option<u128>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LockinConfig {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sampling: Option<String>,
    pub empirical_radius: Option<bool>,
    pub directions: Option<usize>,
    pub bisections: Option<usize>,
    pub walks: Option<usize>,
    pub walk_steps: Option<usize>,
    pub csv: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyConfig {
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub only: Option<usize>,
    pub counterexamples: Option<PathBuf>,
    pub ranges: Option<Ranges>,
    pub output: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c: Config = toml::from_str(
            r#"
            float = true
            [lockin]
            trials = 5
            sampling = "uniform"
            [verify]
            suite = "oracle"
            [verify.ranges]
            max_depth = 3
            "#,
        )
        .unwrap();
        assert_eq!(c.float, Some(true));
        assert_eq!(c.lockin.trials, Some(5));
        assert_eq!(c.verify.suite.as_deref(), Some("oracle"));
        assert_eq!(c.verify.ranges.unwrap().max_depth, 3);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<Config>("[lockin]\ntrails = 5\n").is_err());
    }
}
