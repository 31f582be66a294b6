//! TOML configuration shared by the CLI and the service.
//!
//! ```toml
//! [review_server]
//! url = "https://review.example.com"
//! credentials_env = "REVIEWQ_CREDENTIALS"   # holds "user:http-password"
//! page_size = 100
//!
//! [ingest]
//! window_days = 180
//! age_endpoint = "snapshot"                 # or "closure"
//!
//! [[change_types]]
//! change_type = "TroubleReport"
//! keywords = ["fix", "tr-", "bug", "fault"]
//!
//! [model]
//! path = "model.json"
//! alpha = 1.0
//!
//! [store]
//! path = "dataset.json"
//!
//! [schedule]
//! ingest_at = "02:00"
//! retrain_weekday = "Sun"
//! retrain_at = "03:00"
//!
//! [server]
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! `[model.structure]` takes the same `variables`/`edges` shape as the model
//! artifact; when absent the default five-parent network is used.

use chrono::{NaiveTime, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::bn::NetworkStructure;
use crate::etl::classify::{default_rules, KeywordRule};
use crate::etl::transform::AgeEndpoint;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewServerConfig {
    pub url: String,
    /// Name of the environment variable holding `user:password`.
    #[serde(default)]
    pub credentials_env: Option<String>,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_page_size() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    #[serde(default = "default_window_days")]
    pub window_days: u32,
    #[serde(default)]
    pub age_endpoint: AgeEndpoint,
}

fn default_window_days() -> u32 {
    180
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { window_days: default_window_days(), age_endpoint: AgeEndpoint::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_model_path")]
    pub path: PathBuf,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub structure: Option<NetworkStructure>,
}

fn default_model_path() -> PathBuf {
    PathBuf::from("model.json")
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { path: default_model_path(), alpha: default_alpha(), structure: None }
    }
}

impl ModelConfig {
    pub fn structure(&self) -> NetworkStructure {
        self.structure.clone().unwrap_or_else(NetworkStructure::default_review)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreConfig {
    #[serde(default = "default_store_path")]
    pub path: PathBuf,
}

fn default_store_path() -> PathBuf {
    PathBuf::from("dataset.json")
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { path: default_store_path() }
    }
}

/// Time of day written as `HH:MM` or `HH:MM:SS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeOfDay(pub NaiveTime);

impl TimeOfDay {
    pub fn hm(hour: u32, minute: u32) -> Self {
        TimeOfDay(NaiveTime::from_hms_opt(hour, minute, 0).expect("valid time"))
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.format("%H:%M").to_string())
    }
}

impl<'de> Deserialize<'de> for TimeOfDay {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        NaiveTime::parse_from_str(&s, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(&s, "%H:%M:%S"))
            .map(TimeOfDay)
            .map_err(|e| serde::de::Error::custom(format!("bad time of day {s:?}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_ingest_at")]
    pub ingest_at: TimeOfDay,
    #[serde(default = "default_retrain_weekday")]
    pub retrain_weekday: Weekday,
    #[serde(default = "default_retrain_at")]
    pub retrain_at: TimeOfDay,
    /// How often the scheduler wakes up to check for due jobs.
    #[serde(default = "default_poll_seconds")]
    pub poll_seconds: u64,
}

fn default_ingest_at() -> TimeOfDay {
    TimeOfDay::hm(2, 0)
}

fn default_retrain_weekday() -> Weekday {
    Weekday::Sun
}

fn default_retrain_at() -> TimeOfDay {
    TimeOfDay::hm(3, 0)
}

fn default_poll_seconds() -> u64 {
    30
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            ingest_at: default_ingest_at(),
            retrain_weekday: default_retrain_weekday(),
            retrain_at: default_retrain_at(),
            poll_seconds: default_poll_seconds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { bind: default_bind() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub review_server: ReviewServerConfig,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default = "default_rules")]
    pub change_types: Vec<KeywordRule>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub store: StoreConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub server: ServerConfig,
}

impl Config {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut config: Config = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: base.to_path_buf(),
            source,
        })?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Config::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse { path: path.to_path_buf(), source },
            other => other,
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.model.path, &mut self.store.path] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.review_server.page_size == 0 {
            return Err(ConfigError::Invalid("review_server.page_size must be at least 1".into()));
        }
        if !(self.model.alpha.is_finite() && self.model.alpha > 0.0) {
            return Err(ConfigError::Invalid(format!("model.alpha must be positive, got {}", self.model.alpha)));
        }
        if self.change_types.is_empty() {
            return Err(ConfigError::Invalid("change_types must list at least one rule".into()));
        }
        if self.schedule.poll_seconds == 0 {
            return Err(ConfigError::Invalid("schedule.poll_seconds must be at least 1".into()));
        }
        Ok(())
    }

    /// `(user, password)` read from the configured environment variable.
    pub fn credentials(&self) -> Result<Option<(String, String)>, ConfigError> {
        let Some(var) = &self.review_server.credentials_env else {
            return Ok(None);
        };
        let value = std::env::var(var)
            .map_err(|_| ConfigError::Invalid(format!("environment variable {var} is not set")))?;
        let (user, pass) = value
            .split_once(':')
            .ok_or_else(|| ConfigError::Invalid(format!("{var} must hold user:password")))?;
        Ok(Some((user.to_string(), pass.to_string())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::ChangeType;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = Config::from_toml("[review_server]\nurl = \"http://localhost:1\"\n", Path::new("/srv")).unwrap();
        assert_eq!(c.review_server.page_size, 100);
        assert_eq!(c.ingest.window_days, 180);
        assert_eq!(c.model.alpha, 1.0);
        assert_eq!(c.model.path, PathBuf::from("/srv/model.json"));
        assert_eq!(c.store.path, PathBuf::from("/srv/dataset.json"));
        assert_eq!(c.schedule.ingest_at, TimeOfDay::hm(2, 0));
        assert_eq!(c.schedule.retrain_weekday, Weekday::Sun);
        assert_eq!(c.schedule.retrain_at, TimeOfDay::hm(3, 0));
        assert_eq!(c.change_types, default_rules());
        assert_eq!(c.model.structure(), NetworkStructure::default_review());
    }

    #[test]
    fn full_config() {
        let text = r#"
[review_server]
url = "http://gerrit"
credentials_env = "RQ_TEST_CRED"
page_size = 25

[ingest]
window_days = 30
age_endpoint = "closure"

[[change_types]]
change_type = "TroubleReport"
keywords = ["hotfix"]

[model]
path = "/abs/model.json"
alpha = 0.5

[model.structure]
variables = [
  { name = "test_verdict", states = ["-1", "0", "+1"] },
  { name = "change_status", states = ["abandoned", "merged"] },
]
edges = [["test_verdict", "change_status"]]

[schedule]
ingest_at = "01:30"
retrain_weekday = "Mon"
retrain_at = "04:15:00"
poll_seconds = 5
"#;
        let c = Config::from_toml(text, Path::new("/etc")).unwrap();
        assert_eq!(c.ingest.age_endpoint, AgeEndpoint::Closure);
        assert_eq!(c.change_types[0].change_type, ChangeType::TroubleReport);
        assert_eq!(c.model.path, PathBuf::from("/abs/model.json"));
        assert_eq!(c.model.structure().len(), 2);
        assert_eq!(c.schedule.retrain_weekday, Weekday::Mon);
        assert_eq!(c.schedule.retrain_at, TimeOfDay::hm(4, 15));
    }

    #[test]
    fn rejects_bad_values() {
        let base = Path::new(".");
        assert!(Config::from_toml("[review_server]\nurl='x'\npage_size=0\n", base).is_err());
        assert!(Config::from_toml("[review_server]\nurl='x'\n[model]\nalpha=0\n", base).is_err());
        assert!(Config::from_toml("[review_server]\nurl='x'\nbogus=1\n", base).is_err());
        assert!(Config::from_toml("[review_server]\nurl='x'\n[schedule]\ningest_at='25:00'\n", base).is_err());
        let cyclic = "[review_server]\nurl='x'\n[model.structure]\nvariables=[{name='a',states=['x','y']},{name='change_status',states=['abandoned','merged']}]\nedges=[['change_status','a']]\n";
        assert!(Config::from_toml(cyclic, base).is_err());
    }

    #[test]
    fn credentials_from_env() {
        let mut c = Config::from_toml("[review_server]\nurl='x'\n", Path::new(".")).unwrap();
        assert_eq!(c.credentials().unwrap(), None);
        c.review_server.credentials_env = Some("RQ_CONFIG_TEST_CREDENTIALS".into());
        assert!(c.credentials().is_err());
        std::env::set_var("RQ_CONFIG_TEST_CREDENTIALS", "bot:s3cret");
        assert_eq!(c.credentials().unwrap(), Some(("bot".into(), "s3cret".into())));
    }
}
