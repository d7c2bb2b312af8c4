use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

/// Defaults read from `--config`. Explicit flags win over every field.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub json: Option<bool>,
    pub epsilon: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub decay: Option<String>,
    pub digits: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
