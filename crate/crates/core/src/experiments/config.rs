//! TOML run configuration with dotted-path overrides.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use super::initial::InitialSpec;
use crate::error::{Error, Result};
use crate::laws::{builtin_law, LawSpec};
use crate::solver::{Physics, Probe, TimeStepperConfig};
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub box_length: f64,
    #[serde(default = "one")]
    pub dealias_fraction: f64,
}

fn one() -> f64 {
    1.0
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::with_dealias(self.n, self.box_length, self.dealias_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawsConfig {
    pub kappa: LawSpec,
    pub mu: LawSpec,
    #[serde(default = "one")]
    pub beta: f64,
}

impl LawsConfig {
    pub fn build(&self) -> Result<Physics> {
        Physics::new(builtin_law(&self.kappa)?, builtin_law(&self.mu)?, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub theta: InitialSpec,
    pub u: InitialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub probes: Vec<String>,
    /// Sobolev exponents `(s_θ, s_u)` of the ledger's `*_hs` columns.
    #[serde(default = "default_exponents")]
    pub exponents: (f64, f64),
    pub grid: GridConfig,
    pub laws: LawsConfig,
    pub initial: InitialConfig,
    pub stepper: TimeStepperConfig,
}

fn default_exponents() -> (f64, f64) {
    (1.0, 0.0)
}

impl RunConfig {
    /// Checks everything that can be checked before allocating fields.
    pub fn validate(&self) -> Result<()> {
        let v = |e: Error| Error::Config(e.to_string());
        self.grid.build().map_err(v)?;
        builtin_law(&self.laws.kappa).map_err(v)?;
        builtin_law(&self.laws.mu).map_err(v)?;
        if !self.laws.beta.is_finite() {
            return Err(Error::Config("beta must be finite".into()));
        }
        self.initial.theta.validate().map_err(v)?;
        self.initial.u.validate().map_err(v)?;
        self.stepper.validate().map_err(v)?;
        self.parsed_probes()?;
        let (a, b) = self.exponents;
        if !((-4.0..=8.0).contains(&a) && (-4.0..=8.0).contains(&b)) {
            return Err(Error::Config(format!("exponents must lie in [-4, 8], got ({a}, {b})")));
        }
        Ok(())
    }

    pub fn parsed_probes(&self) -> Result<Vec<Probe>> {
        self.probes
            .iter()
            .map(|name| {
                Probe::parse(name).ok_or_else(|| {
                    let known: Vec<&str> = Probe::ALL.iter().map(|p| p.name()).collect();
                    Error::Config(format!("unknown probe `{name}`; known probes: {}", known.join(", ")))
                })
            })
            .collect()
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = parse_with_overrides(&text, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `key.path=value`, where `value` is read as a TOML value and falls back to
/// a bare string.
pub fn parse_override(item: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("empty key segment in `{key}`")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
    Ok((path, value))
}

pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (path, value) = parse_override(item)?;
        let (last, parents) = path.split_last().expect("nonempty path");
        let mut cur = &mut *table;
        for p in parents {
            let entry = cur
                .entry(p.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{p}` in `{item}` is not a table")))?;
        }
        cur.insert(last.clone(), value);
    }
    Ok(())
}

pub fn parse_with_overrides<T: DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    apply_overrides(&mut table, overrides)?;
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

/// Overrides applied to the serialized form of `base`.
pub fn override_value<T: Serialize + DeserializeOwned>(base: &T, overrides: &[String]) -> Result<T> {
    let text = to_toml(base)?;
    parse_with_overrides(&text, overrides)
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Config(e.to_string()))
}

/// Hex SHA-256 of the resolved TOML text.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
output_dir = "out"
probes = ["eta", "support"]

[grid]
n = 32

[laws]
kappa = { kind = "tanh_smooth", lo = 1.0, hi = 3.0 }
mu = { kind = "constant", value = 0.5 }

[initial]
theta = { kind = "random_hs", s = 1.5, norm = 1.0 }
u = { kind = "taylor_green" }

[stepper]
dt = 0.001
t_end = 0.1
"#;

    #[test]
    fn parses_and_overrides() {
        let cfg: RunConfig = parse_with_overrides(SAMPLE, &["stepper.dt=\"auto\"".into(), "grid.n=48".into()]).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid.n, 48);
        assert_eq!(cfg.stepper.dt, crate::solver::Dt::Auto);
        let again: RunConfig = parse_with_overrides(&to_toml(&cfg).unwrap(), &[]).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_probe_and_keys() {
        let cfg: RunConfig = parse_with_overrides(SAMPLE, &["probes=[\"vorticity\"]".into()]).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(parse_with_overrides::<RunConfig>(SAMPLE, &["grid.size=3".into()]).is_err());
        assert!(parse_override("nokey").is_err());
    }

    #[test]
    fn bare_strings_fall_back() {
        let (p, v) = parse_override("output_dir=runs/a b").unwrap();
        assert_eq!(p, vec!["output_dir".to_string()]);
        assert_eq!(v, toml::Value::String("runs/a b".into()));
    }
}
