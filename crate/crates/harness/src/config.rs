use std::collections::HashSet;
use std::path::{Path, PathBuf};

use divergauge_core::decoding::DecodeConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::prompt::PromptStyle;
use crate::samples::REFERENCE_LABEL;

pub const SEED_ENV: &str = "DIVERGAUGE_SEED";

/// Where next-token distributions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderSpec {
    /// Saved n-gram models.
    Toylm { base: PathBuf, instruct: PathBuf },
    /// The built-in synthetic pair, trained in memory.
    Fixture {
        #[serde(default = "default_fixture_seed")]
        seed: u64,
    },
    /// An external adapter speaking the stdio protocol.
    Adapter { command: Vec<String> },
}

fn default_fixture_seed() -> u64 {
    divergauge_core::toylm::FixtureSpec::default().seed
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunModel {
    /// Instruct model alone; no base model attached.
    #[default]
    Instruct,
    /// Base model alone.
    Base,
    /// Instruct model steered towards the base model with weight `gamma`.
    Conformative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub label: String,
    #[serde(default)]
    pub model: RunModel,
    /// Overrides `decode.gamma` for conformative runs.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub prompt_style: Option<PromptStyle>,
    #[serde(default)]
    pub pre_truncation_mix: Option<bool>,
}

impl RunSpec {
    pub fn new(label: &str, model: RunModel, gamma: Option<f64>) -> Self {
        Self {
            label: label.into(),
            model,
            gamma,
            prompt_style: None,
            pre_truncation_mix: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncipitMode {
    #[default]
    CoreSimple,
    /// Count tokens with the provider's tokenizer.
    Provider,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples_per_prompt: usize,
    #[serde(default = "default_incipit")]
    pub incipit_tokens: usize,
    #[serde(default)]
    pub incipit_mode: IncipitMode,
    #[serde(default)]
    pub prompt_style: PromptStyle,
    pub provider: ProviderSpec,
    #[serde(default)]
    pub decode: DecodeConfig,
    #[serde(default = "default_runs")]
    pub runs: Vec<RunSpec>,
}

fn default_samples() -> usize {
    50
}

fn default_incipit() -> usize {
    20
}

/// Baseline nucleus sampling and conformative decoding at `γ = 0.5`.
pub fn default_runs() -> Vec<RunSpec> {
    vec![
        RunSpec::new("A", RunModel::Instruct, None),
        RunSpec::new("B", RunModel::Conformative, Some(0.5)),
    ]
}

impl ExperimentConfig {
    pub fn new(provider: ProviderSpec) -> Self {
        Self {
            seed: 0,
            samples_per_prompt: default_samples(),
            incipit_tokens: default_incipit(),
            incipit_mode: IncipitMode::default(),
            prompt_style: PromptStyle::default(),
            provider,
            decode: DecodeConfig::default(),
            runs: default_runs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_prompt == 0 {
            return Err(HarnessError::Config("samples_per_prompt must be positive".into()));
        }
        if self.runs.is_empty() {
            return Err(HarnessError::Config("no runs configured".into()));
        }
        self.decode.validate()?;
        let mut labels = HashSet::new();
        for r in &self.runs {
            let ok = !r.label.is_empty()
                && r.label != REFERENCE_LABEL
                && r.label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !ok {
                return Err(HarnessError::Config(format!(
                    "run label {:?} must be non-empty, not {REFERENCE_LABEL:?}, and use only [A-Za-z0-9._-]",
                    r.label
                )));
            }
            if !labels.insert(&r.label) {
                return Err(HarnessError::Config(format!("duplicate run label {:?}", r.label)));
            }
            self.run_decode(r).validate()?;
        }
        if let ProviderSpec::Adapter { command } = &self.provider {
            if command.is_empty() {
                return Err(HarnessError::Config("adapter command is empty".into()));
            }
        }
        Ok(())
    }

    /// Decoding settings of one run, before the per-sample seed is filled in.
    pub fn run_decode(&self, run: &RunSpec) -> DecodeConfig {
        let mut d = self.decode.clone();
        d.seed = 0;
        d.gamma = match run.model {
            RunModel::Conformative => run.gamma.unwrap_or(self.decode.gamma),
            RunModel::Instruct | RunModel::Base => 1.0,
        };
        if let Some(m) = run.pre_truncation_mix {
            d.pre_truncation_mix = m;
        }
        d
    }

    pub fn run_style(&self, run: &RunSpec) -> PromptStyle {
        run.prompt_style.unwrap_or(self.prompt_style)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        if let ProviderSpec::Toylm { base, instruct } = &mut self.provider {
            for p in [base, instruct] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
    }

    /// Replaces the seed with `DIVERGAUGE_SEED` when that is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses, resolves provider paths against the file's directory and applies
/// the seed override.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text).map_err(|e| HarnessError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    cfg.apply_env_seed()?;
    Ok(cfg)
}
