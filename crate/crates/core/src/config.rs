//! Run configuration.
//!
//! Files are TOML; every key may be written as a dotted path
//! (`selector.r_init = 0.05`) or inside a section. Any key can be overridden
//! from the environment with `SELFPACE_<SECTION>__<KEY>`, e.g.
//! `SELFPACE_SELECTOR__R_INIT=0.05` or `SELFPACE_SEED=7`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::SynthConfig;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::features::FeaturizerConfig;
use crate::model::ModelSpec;
use crate::optim::AdamWConfig;
use crate::types::SelectorConfig;

pub const ENV_PREFIX: &str = "SELFPACE_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "spl")]
    Spl,
    #[serde(rename = "no-spl")]
    NoSpl,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spl => "spl",
            Mode::NoSpl => "no-spl",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spl" => Ok(Mode::Spl),
            "no-spl" | "nospl" => Ok(Mode::NoSpl),
            other => Err(Error::config("mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub max_epochs: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub patience: u64,
    pub min_delta: f64,
    /// Pins the threshold every epoch instead of scheduling it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_override: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let opt = AdamWConfig::default();
        TrainingConfig {
            max_epochs: 50,
            batch_size: 16,
            learning_rate: opt.learning_rate,
            beta1: opt.beta1,
            beta2: opt.beta2,
            epsilon: opt.epsilon,
            weight_decay: opt.weight_decay,
            patience: 5,
            min_delta: 0.0,
            lambda_override: None,
        }
    }
}

impl TrainingConfig {
    pub fn optimizer(&self) -> AdamWConfig {
        AdamWConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::config("training.max_epochs", "must be ≥ 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("training.batch_size", "must be ≥ 1"));
        }
        if self.patience == 0 {
            return Err(Error::config("training.patience", "must be ≥ 1"));
        }
        if !(self.min_delta >= 0.0) {
            return Err(Error::config("training.min_delta", "must be ≥ 0"));
        }
        if let Some(l) = self.lambda_override {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::config(
                    "training.lambda_override",
                    "must be in [0, 1]",
                ));
            }
        }
        self.optimizer().validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: Mode,
    pub selector: SelectorConfig,
    pub training: TrainingConfig,
    pub model: ModelSpec,
    pub featurizer: FeaturizerConfig,
    pub eval: EvalConfig,
    /// Only read by corpus generation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            mode: Mode::Spl,
            selector: SelectorConfig::default(),
            training: TrainingConfig::default(),
            model: ModelSpec::default(),
            featurizer: FeaturizerConfig::default(),
            eval: EvalConfig::default(),
            synth: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        prefix("selector", self.selector.validate())?;
        self.training.validate()?;
        self.model.validate()?;
        self.featurizer.validate()?;
        self.eval.validate()?;
        if let Some(s) = &self.synth {
            prefix("synth", s.validate())?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, excluding the corpus-generation section.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.synth = None;
        digest_json(&c)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_env(text, std::iter::empty())
    }

    pub fn from_toml_with_env<I>(text: &str, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_owned()))?;
        apply_env_overrides(&mut table, env)?;
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `SELFPACE_*` variables from the process
    /// environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_env(&text, std::env::vars())
    }
}

fn prefix(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Config { field, reason } if !field.contains('.') => Error::Config {
            field: format!("{section}.{field}"),
            reason,
        },
        other => other,
    })
}

pub fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config values serialise");
    hex::encode(Sha256::digest(&bytes))
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_env_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

/// Applies `SELFPACE_A__B=value` pairs as `a.b = value`.
pub fn apply_env_overrides<I>(table: &mut toml::Table, env: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut pairs: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    pairs.sort();
    for (key, raw) in pairs {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_ascii_lowercase())
            .collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(Error::config(key, "malformed override key"));
        }
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut node = &mut *table;
        for p in parents {
            let entry = node
                .entry(p.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = match entry {
                toml::Value::Table(t) => t,
                _ => return Err(Error::config(p.clone(), "is not a section")),
            };
        }
        node.insert(last.clone(), parse_env_value(&raw));
    }
    Ok(())
}

/// Hyperparameter grid for selector tuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Axis name to candidate values. Names are `SelectorConfig` fields.
    pub axes: std::collections::BTreeMap<String, Vec<f64>>,
}

pub const GRID_AXES: [&str; 7] = [
    "r_init",
    "k",
    "gamma0",
    "alpha",
    "r_max",
    "local_window",
    "min_select_ratio",
];

impl Default for GridSpec {
    fn default() -> Self {
        let axes = [
            ("r_init", vec![0.05, 0.1, 0.15]),
            ("k", vec![5.0, 10.0, 15.0]),
            ("gamma0", vec![0.02, 0.025, 0.03]),
            ("alpha", vec![0.2, 0.3, 0.4]),
            ("r_max", vec![0.05, 0.1, 0.15]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        GridSpec { axes }
    }
}

impl GridSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let g: GridSpec =
            toml::from_str(text).map_err(|e| Error::config("grid", e.message().to_owned()))?;
        Ok(g)
    }

    pub fn validate(&self, base: &SelectorConfig) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::config("grid.axes", "must not be empty"));
        }
        for (name, values) in &self.axes {
            if !GRID_AXES.contains(&name.as_str()) {
                return Err(Error::config(
                    format!("grid.axes.{name}"),
                    "is not a selector field",
                ));
            }
            if values.is_empty() {
                return Err(Error::config(format!("grid.axes.{name}"), "has no values"));
            }
            for &v in values {
                let mut c = *base;
                set_selector_field(&mut c, name, v)?;
                prefix("selector", c.validate())?;
            }
        }
        Ok(())
    }

    /// Cartesian product in lexicographic order: axes by name, values ascending.
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (name, values) in &self.axes {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            points = points
                .into_iter()
                .flat_map(|p| {
                    sorted.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((name.clone(), v));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

pub fn set_selector_field(c: &mut SelectorConfig, name: &str, v: f64) -> Result<()> {
    match name {
        "r_init" => c.r_init = v,
        "k" => c.k = v,
        "gamma0" => c.gamma0 = v,
        "alpha" => c.alpha = v,
        "r_max" => c.r_max = v,
        "local_window" => c.local_window = v,
        "min_select_ratio" => c.min_select_ratio = v,
        other => {
            return Err(Error::config(
                format!("grid.axes.{other}"),
                "is not a selector field",
            ))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.training.max_epochs, 50);
        assert_eq!(c.training.batch_size, 16);
        assert_eq!(c.training.learning_rate, 1e-5);
        assert_eq!(c.training.patience, 5);
        assert_eq!(c.featurizer.max_tokens, 512);
    }

    #[test]
    fn dotted_keys_and_sections() {
        let a = RunConfig::from_toml_str("selector.r_init = 0.05\nmode = \"no-spl\"\n").unwrap();
        let b = RunConfig::from_toml_str("mode = \"no-spl\"\n[selector]\nr_init = 0.05\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.selector.r_init, 0.05);
        assert_eq!(a.mode, Mode::NoSpl);
        let m = RunConfig::from_toml_str("[model]\nkind = \"mlp\"\nhidden = 8\n").unwrap();
        assert_eq!(m.model, ModelSpec::Mlp { hidden: 8 });
    }

    #[test]
    fn env_overrides() {
        let env = vec![
            ("SELFPACE_SELECTOR__K".to_owned(), "15".to_owned()),
            ("SELFPACE_SEED".to_owned(), "99".to_owned()),
            ("SELFPACE_MODE".to_owned(), "no-spl".to_owned()),
            ("OTHER_VAR".to_owned(), "x".to_owned()),
        ];
        let c = RunConfig::from_toml_with_env("selector.k = 5.0\n", env).unwrap();
        assert_eq!(c.selector.k, 15.0);
        assert_eq!(c.seed, 99);
        assert_eq!(c.mode, Mode::NoSpl);
    }

    #[test]
    fn field_level_errors() {
        let e = RunConfig::from_toml_str("selector.k = -1.0\n").unwrap_err();
        assert_eq!(e.to_string(), "invalid config: selector.k must be ≥ 0");
        let e = RunConfig::from_toml_str("selector.bogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RunConfig::from_toml_str("[synth]\nn_samples = 0\n").unwrap_err();
        assert!(e.to_string().contains("n_samples must be positive"), "{e}");
    }

    #[test]
    fn digest_tracks_fields() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.selector.alpha = 0.31;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn default_grid_has_243_points() {
        let g = GridSpec::default();
        g.validate(&SelectorConfig::default()).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 243);
        // lexicographic: first axis alphabetically is alpha
        assert_eq!(pts[0][0], ("alpha".to_owned(), 0.2));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec {
            axes: Default::default()
        }
        .validate(&SelectorConfig::default())
        .is_err());
        let g = GridSpec::from_toml_str("[axes]\nk = [-1.0]\n").unwrap();
        assert!(g.validate(&SelectorConfig::default()).is_err());
        let g = GridSpec::from_toml_str("[axes]\nwidth = [1.0]\n").unwrap();
        assert!(g.validate(&SelectorConfig::default()).is_err());
    }
}
