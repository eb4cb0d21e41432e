//! Service configuration: one JSON file plus environment overrides.
//!
//! The file is a superset of the fusion config format, so the same file
//! can be passed to `pneumo fuse --config` and `pneumo serve --config`:
//!
//! ```json
//! { "weights": {"img": 0.40, "sym": 0.20, "cgh": 0.20, "sp": 0.20},
//!   "thresholds": {"high": 0.75, "moderate": 0.50},
//!   "model": "models/cough.json", "data_dir": "pneumo-data",
//!   "bind": "127.0.0.1:8080", "aggregation": "mean" }
//! ```
//!
//! Precedence, lowest first: defaults, file, `PF_*` environment, CLI flags.
//! Relative paths in the file resolve against the file's directory.

use pneumo_core::fusion::{FusionConfig, FusionError, ModalityWeights, Thresholds};
use pneumo_core::gbdt::Aggregation;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const ENV_CONFIG: &str = "PF_CONFIG";
pub const ENV_MODEL: &str = "PF_MODEL";
pub const ENV_DATA_DIR: &str = "PF_DATA_DIR";
pub const ENV_BIND: &str = "PF_BIND";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ModalityWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<PathBuf>,
    #[serde(default)]
    pub aggregation: Aggregation,
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("pneumo-data")
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            name: None,
            weights: None,
            thresholds: None,
            model: None,
            data_dir: default_data_dir(),
            bind: default_bind(),
            vocabulary: None,
            aggregation: Aggregation::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("parsing config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = cfg.model.as_mut() {
            rebase(m);
        }
        if let Some(v) = cfg.vocabulary.as_mut() {
            rebase(v);
        }
        rebase(&mut cfg.data_dir);
        cfg.fusion()?;
        Ok(cfg)
    }

    /// Load from `path`, or from `PF_CONFIG` when no path is given, then
    /// apply the remaining `PF_*` overrides. `env` is injectable for tests.
    pub fn resolve(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> anyhow::Result<Self> {
        let from_env = env(ENV_CONFIG).map(PathBuf::from);
        let mut cfg = match path.or(from_env.as_deref()) {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(m) = env(ENV_MODEL) {
            cfg.model = Some(m.into());
        }
        if let Some(d) = env(ENV_DATA_DIR) {
            cfg.data_dir = d.into();
        }
        if let Some(b) = env(ENV_BIND) {
            cfg.bind = b;
        }
        Ok(cfg)
    }

    pub fn from_process_env(path: Option<&Path>) -> anyhow::Result<Self> {
        Self::resolve(path, |k| std::env::var(k).ok())
    }

    /// Fusion settings; base weights and default thresholds when unset.
    pub fn fusion(&self) -> Result<FusionConfig, FusionError> {
        let base = FusionConfig::base();
        let cfg = FusionConfig {
            name: self.name.clone().unwrap_or_else(|| {
                if self.weights.is_some() {
                    "custom".into()
                } else {
                    base.name.clone()
                }
            }),
            weights: self.weights.unwrap_or(base.weights),
            thresholds: self.thresholds.unwrap_or(base.thresholds),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn defaults() {
        let cfg = ServiceConfig::resolve(None, |_| None).unwrap();
        assert_eq!(cfg, ServiceConfig::default());
        assert_eq!(cfg.fusion().unwrap(), FusionConfig::base());
    }

    #[test]
    fn file_then_env() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"weights":{"img":0.55,"sym":0.15,"cgh":0.15,"sp":0.15},"model":"m.json","bind":"0.0.0.0:1"}"#,
        )
        .unwrap();
        let env: HashMap<&str, String> = [
            (ENV_CONFIG, path.display().to_string()),
            (ENV_BIND, "127.0.0.1:9".to_string()),
        ]
        .into();
        let cfg = ServiceConfig::resolve(None, |k| env.get(k).cloned()).unwrap();
        assert_eq!(cfg.bind, "127.0.0.1:9");
        assert_eq!(cfg.model, Some(dir.path().join("m.json")));
        assert_eq!(cfg.data_dir, dir.path().join("pneumo-data"));
        assert_eq!(cfg.fusion().unwrap().weights.img, 0.55);
        assert_eq!(cfg.fusion().unwrap().thresholds, Thresholds::default());
    }

    #[test]
    fn bad_weights_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"weights":{"img":0.5,"sym":0.5,"cgh":0.5,"sp":0.5}}"#).unwrap();
        assert!(ServiceConfig::from_file(&path).is_err());
    }
}
