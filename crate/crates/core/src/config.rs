//! Flat key=value run configuration.
//!
//! One `key = value` per line, `#` comments, no sections. Unknown keys are
//! rejected by name; missing keys take the documented defaults; every value
//! is type- and range-checked at load time.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::agents::{BaselineParams, QHyperParams};
use crate::governance::GovernancePolicy;
use crate::traffic::TrafficMix;

/// Every accepted key with its default, in documentation order.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("traffic.p_normal", "0.70"),
    ("traffic.p_phishing", "0.10"),
    ("traffic.p_ransomware", "0.10"),
    ("traffic.p_ddos", "0.10"),
    ("agent.alpha", "0.1"),
    ("agent.gamma", "0.95"),
    ("agent.epsilon_train", "0.1"),
    ("agent.epsilon_eval", "0.0"),
    ("agent.episodes", "500"),
    ("baseline.p_detect", "0.70"),
    ("baseline.p_false", "0.15"),
    ("governance.fpr_cap", "0.30"),
    ("governance.window", "100"),
    ("governance.warmup", "20"),
    ("governance.enabled", "true"),
    ("run.seed", "42"),
    ("run.episodes", "500"),
    ("run.steps_per_episode", "100"),
    ("run.eval_events", "10000"),
    ("output.dir", "out"),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown config key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate config key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value for {key}: {detail}")]
    BadValue { key: String, detail: String },
    #[error("agent.episodes ({agent}) conflicts with run.episodes ({run})")]
    EpisodeConflict { agent: u32, run: u32 },
}

/// Fully validated configuration for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub episodes: u32,
    pub steps_per_episode: u32,
    pub eval_events: u32,
    pub mix: TrafficMix,
    pub q_params: QHyperParams,
    pub baseline: BaselineParams,
    pub governance: GovernancePolicy,
    pub governance_enabled: bool,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            episodes: 500,
            steps_per_episode: 100,
            eval_events: 10_000,
            mix: TrafficMix::default(),
            q_params: QHyperParams::default(),
            baseline: BaselineParams::default(),
            governance: GovernancePolicy::default(),
            governance_enabled: true,
            output_dir: "out".to_string(),
        }
    }
}

struct RawConfig {
    values: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(content: &str) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (index, raw) in content.lines().enumerate() {
            let line = index + 1;
            let text = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            let Some((key, value)) = text.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: text.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if values.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            values.insert(key, (line, value));
        }
        Ok(Self { values })
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((_, raw)) => raw.parse::<T>().map(Some).map_err(|e| ConfigError::BadValue {
                key: key.to_string(),
                detail: format!("'{raw}': {e}"),
            }),
        }
    }

    fn get_or<T>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

impl RunConfig {
    /// Parse and validate a config file's contents.
    pub fn parse_str(content: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(content)?;
        let defaults = RunConfig::default();

        let mix = TrafficMix::new(
            raw.get_or("traffic.p_normal", 0.70)?,
            raw.get_or("traffic.p_phishing", 0.10)?,
            raw.get_or("traffic.p_ransomware", 0.10)?,
            raw.get_or("traffic.p_ddos", 0.10)?,
        )
        .map_err(|e| ConfigError::BadValue {
            key: "traffic.*".to_string(),
            detail: e.to_string(),
        })?;

        // agent.episodes and run.episodes name the same quantity; accept
        // either, reject contradictions.
        let agent_episodes: Option<u32> = raw.get("agent.episodes")?;
        let run_episodes: Option<u32> = raw.get("run.episodes")?;
        let episodes = match (agent_episodes, run_episodes) {
            (Some(a), Some(r)) if a != r => {
                return Err(ConfigError::EpisodeConflict { agent: a, run: r })
            }
            (_, Some(r)) => r,
            (Some(a), None) => a,
            (None, None) => defaults.episodes,
        };

        let q_params = QHyperParams::new(
            raw.get_or("agent.alpha", 0.1)?,
            raw.get_or("agent.gamma", 0.95)?,
            raw.get_or("agent.epsilon_train", 0.1)?,
            raw.get_or("agent.epsilon_eval", 0.0)?,
            episodes,
        )
        .map_err(|e| ConfigError::BadValue {
            key: "agent.*".to_string(),
            detail: e.to_string(),
        })?;

        let baseline = BaselineParams::new(
            raw.get_or("baseline.p_detect", 0.70)?,
            raw.get_or("baseline.p_false", 0.15)?,
        )
        .map_err(|e| ConfigError::BadValue {
            key: "baseline.*".to_string(),
            detail: e.to_string(),
        })?;

        let governance = GovernancePolicy::new(
            raw.get_or("governance.fpr_cap", 0.30)?,
            raw.get_or("governance.window", 100usize)?,
            raw.get_or("governance.warmup", 20usize)?,
        )
        .map_err(|e| ConfigError::BadValue {
            key: "governance.*".to_string(),
            detail: e.to_string(),
        })?;

        let steps_per_episode: u32 = raw.get_or("run.steps_per_episode", 100)?;
        if steps_per_episode < 1 {
            return Err(ConfigError::BadValue {
                key: "run.steps_per_episode".to_string(),
                detail: "must be >= 1".to_string(),
            });
        }
        let eval_events: u32 = raw.get_or("run.eval_events", 10_000)?;
        if eval_events < 1 {
            return Err(ConfigError::BadValue {
                key: "run.eval_events".to_string(),
                detail: "must be >= 1".to_string(),
            });
        }

        Ok(Self {
            seed: raw.get_or("run.seed", defaults.seed)?,
            episodes,
            steps_per_episode,
            eval_events,
            mix,
            q_params,
            baseline,
            governance,
            governance_enabled: raw.get_or("governance.enabled", true)?,
            output_dir: raw.get_or("output.dir", defaults.output_dir.clone())?,
        })
    }

    /// Load from a file path.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_str(&content)
    }

    /// Apply a single key=value pair on top of this config; used by callers
    /// that assemble configs programmatically.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.to_string(),
            });
        }
        // agent.episodes aliases run.episodes; emit the canonical key only.
        let key = if key == "agent.episodes" { "run.episodes" } else { key };
        let mut content = String::new();
        for (known, _) in KNOWN_KEYS {
            if *known == "agent.episodes" {
                continue;
            }
            let effective = if *known == key {
                value.to_string()
            } else {
                self.value_of(known)
            };
            content.push_str(&format!("{known} = {effective}\n"));
        }
        *self = Self::parse_str(&content)?;
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "traffic.p_normal" => self.mix.probability(crate::traffic::TrafficClass::Normal).to_string(),
            "traffic.p_phishing" => self.mix.probability(crate::traffic::TrafficClass::Phishing).to_string(),
            "traffic.p_ransomware" => self.mix.probability(crate::traffic::TrafficClass::Ransomware).to_string(),
            "traffic.p_ddos" => self.mix.probability(crate::traffic::TrafficClass::DDoS).to_string(),
            "agent.alpha" => self.q_params.alpha.to_string(),
            "agent.gamma" => self.q_params.gamma.to_string(),
            "agent.epsilon_train" => self.q_params.epsilon_train.to_string(),
            "agent.epsilon_eval" => self.q_params.epsilon_eval.to_string(),
            "agent.episodes" => self.episodes.to_string(),
            "baseline.p_detect" => self.baseline.p_detect.to_string(),
            "baseline.p_false" => self.baseline.p_false.to_string(),
            "governance.fpr_cap" => self.governance.fpr_cap.to_string(),
            "governance.window" => self.governance.window.to_string(),
            "governance.warmup" => self.governance.warmup.to_string(),
            "governance.enabled" => self.governance_enabled.to_string(),
            "run.seed" => self.seed.to_string(),
            "run.episodes" => self.episodes.to_string(),
            "run.steps_per_episode" => self.steps_per_episode.to_string(),
            "run.eval_events" => self.eval_events.to_string(),
            "output.dir" => self.output_dir.clone(),
            _ => String::new(),
        }
    }
}
