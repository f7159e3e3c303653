use std::path::{Path, PathBuf};

use isomech::experiments::MuStarSpec;
use isomech::{Family, ScoreBounds, UtilityFn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Loads `--config` (a plain config object or a replay sidecar), applies
/// flag overrides and deserializes the result.
pub fn resolve<T: DeserializeOwned>(
    command: &str,
    file: Option<&Path>,
    overrides: Map<String, Value>,
) -> Result<T, CliError> {
    let mut base = match file {
        Some(path) => load(command, path)?,
        None => Map::new(),
    };
    base.extend(overrides);
    serde_json::from_value(Value::Object(base))
        .map_err(|e| CliError::Validation(format!("invalid {command} config: {e}")))
}

fn load(command: &str, path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::Validation(format!("{}: expected a JSON object", path.display())));
    };
    if let (Some(Value::String(cmd)), Some(_)) = (obj.get("command"), obj.get("config")) {
        if cmd != command {
            return Err(CliError::Validation(format!(
                "{} is a sidecar for {cmd:?}, not {command:?}",
                path.display()
            )));
        }
        return match obj.remove("config") {
            Some(Value::Object(inner)) => Ok(inner),
            _ => Err(CliError::Validation(format!("{}: config must be an object", path.display()))),
        };
    }
    Ok(obj)
}

/// Collects flag values that were actually given.
#[derive(Default)]
pub struct Overrides(Map<String, Value>);

impl Overrides {
    pub fn set<T: Serialize>(&mut self, key: &str, value: &Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("serializable flag"));
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}

fn default_seed() -> u64 {
    std::env::var("ISOMECH_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

fn binomial10() -> Family {
    Family::Binomial { m: 10 }
}

fn score_column() -> String {
    "score".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub scores: PathBuf,
    #[serde(default = "score_column")]
    pub column: String,
    #[serde(default)]
    pub ranking: Option<PathBuf>,
    #[serde(default)]
    pub blocks: Option<PathBuf>,
    #[serde(default)]
    pub family: Option<Family>,
}

fn default_mu_star() -> Vec<f64> {
    vec![8.0, 7.0, 6.0, 4.0]
}

fn three() -> usize {
    3
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthfulnessConfig {
    #[serde(default = "binomial10")]
    pub family: Family,
    #[serde(default = "default_mu_star")]
    pub mu_star: Vec<f64>,
    #[serde(default)]
    pub utility: UtilityFn,
    #[serde(default = "three")]
    pub scores_per_item: usize,
    #[serde(default = "truthfulness_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Block sizes; when set, all coarse rankings of these sizes are compared.
    #[serde(default)]
    pub coarse_sizes: Option<Vec<usize>>,
}

fn truthfulness_trials() -> usize {
    100_000
}

fn estimation_grid() -> Vec<usize> {
    vec![10, 20, 30, 50, 75, 100, 150, 200]
}

fn thousand() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationCliConfig {
    #[serde(default = "binomial10")]
    pub family: Family,
    #[serde(default = "estimation_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub mu_star: MuStarSpec,
    #[serde(default = "three")]
    pub scores_per_item: usize,
    #[serde(default = "thousand")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn rate_grid() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024, 2048, 4096]
}

fn minimax_trials() -> usize {
    500
}

fn lower_bound_n() -> Option<usize> {
    Some(512)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxConfig {
    #[serde(default = "binomial10")]
    pub family: Family,
    /// Defaults to the family's natural score range.
    #[serde(default)]
    pub bounds: Option<ScoreBounds>,
    #[serde(default = "rate_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "minimax_trials")]
    pub trials: usize,
    #[serde(default = "one")]
    pub scores_per_item: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Size of the lower-bound construction; `null` skips it.
    #[serde(default = "lower_bound_n")]
    pub lower_bound_n: Option<usize>,
    #[serde(default)]
    pub c: Option<f64>,
    /// Where construction.json goes; defaults to next to `--out`.
    #[serde(default)]
    pub construction: Option<PathBuf>,
}

impl MinimaxConfig {
    pub fn effective_bounds(&self) -> Result<ScoreBounds, CliError> {
        let b = match (self.bounds, self.family) {
            (Some(b), _) => ScoreBounds::new(b.v_min, b.v_max)?,
            (None, Family::Binomial { m }) => ScoreBounds::new(0.0, m as f64)?,
            (None, Family::Gaussian { .. }) => ScoreBounds::new(0.0, 6.0)?,
            (None, _) => ScoreBounds::new(1.0, 9.0)?,
        };
        self.family.check_bounds(&b)?;
        Ok(b)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcmlConfig {
    pub reviews: PathBuf,
    pub authors: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn synthetic_grid() -> Vec<usize> {
    (2..=17).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCliConfig {
    pub pool: PathBuf,
    #[serde(default = "synthetic_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "thousand")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MajorizationMode {
    #[default]
    Standard,
    Natural,
    Weak,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorizationConfig {
    pub a: PathBuf,
    pub b: PathBuf,
    #[serde(default)]
    pub mode: MajorizationMode,
}
