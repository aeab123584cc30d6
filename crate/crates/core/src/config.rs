//! Optional TOML run configuration:
//!
//! ```toml
//! context_window = 32000
//!
//! [generation]
//! model_name = "codestral:22b"
//! temperature = 0.8
//!
//! [strategies.custom]
//! terse = "Shorten every local identifier."
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::StrategyError;
use crate::gateway::GenerationConfig;
use crate::strategies::StrategyCatalog;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub generation: GenerationConfig,
    pub strategies: StrategiesConfig,
    pub context_window: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategiesConfig {
    pub custom: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, StrategyError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| StrategyError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&raw).map_err(|e| match e {
            StrategyError::Config(m) => StrategyError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(raw: &str) -> Result<Self, StrategyError> {
        let cfg: Self = toml::from_str(raw).map_err(|e| StrategyError::Config(e.to_string()))?;
        cfg.catalog()?;
        Ok(cfg)
    }

    pub fn catalog(&self) -> Result<StrategyCatalog, StrategyError> {
        StrategyCatalog::with_custom(self.strategies.custom.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = Config::parse(
            "context_window = 100\n[generation]\ntemperature = 0.2\n[strategies.custom]\nterse = \"Be brief.\"\n",
        )
        .unwrap();
        assert_eq!(cfg.context_window, Some(100));
        assert_eq!(cfg.generation.temperature, 0.2);
        assert_eq!(cfg.generation.top_k, 40);
        assert!(cfg.catalog().unwrap().resolve("terse").is_ok());
        assert_eq!(Config::parse("").unwrap().generation, GenerationConfig::default());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(matches!(
            Config::parse("[strategies.custom]\nsecurity = \"x\"\n"),
            Err(StrategyError::ShadowsBuiltin(_))
        ));
        assert!(Config::parse("[generation]\ntemp = 1\n").is_err());
    }
}
