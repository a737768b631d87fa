use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::mix::{check_gamma, conformative_mix, restrict_to_valid};
use super::{sample_token, LogProbVector, Truncation, ValidSet};
use crate::error::{Error, Result};

/// A model that scores the next token given a context of token ids.
pub trait DistributionProvider: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Logits or log-probabilities over the whole vocabulary.
    fn next_logprobs(&self, context: &[u32]) -> Result<LogProbVector>;
}

/// Text to token ids and back.
pub trait TextCodec: Send + Sync {
    fn encode(&self, text: &str) -> Result<Vec<u32>>;
    fn decode(&self, ids: &[u32]) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    pub truncation: Truncation,
    /// Weight of the instruct model; `1` disables the base model.
    pub gamma: f64,
    pub temperature: f64,
    pub max_tokens: usize,
    pub seed: u64,
    /// Added to whatever stop tokens the provider reports.
    pub stop_tokens: Vec<u32>,
    /// Truncate the mixed distribution instead of the instruct one.
    pub pre_truncation_mix: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            truncation: Truncation::default(),
            gamma: 0.5,
            temperature: 1.0,
            max_tokens: 500,
            seed: 0,
            stop_tokens: Vec::new(),
            pre_truncation_mix: false,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        check_gamma(self.gamma)?;
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperature {} must be positive and finite",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StopToken,
    MaxTokens,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub token: u32,
    pub valid_size: usize,
    pub valid_mass: f64,
    /// Probability of `token` under the distribution it was drawn from.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    /// Sampled continuation, without the prompt and without a final stop
    /// token.
    pub tokens: Vec<u32>,
    pub steps: Vec<StepRecord>,
    pub stop_reason: StopReason,
}

/// One decoding step: the distribution to sample from and the valid set it
/// was restricted to.
pub fn step_distribution(
    instruct: &LogProbVector,
    base: Option<&LogProbVector>,
    cfg: &DecodeConfig,
) -> Result<(LogProbVector, ValidSet)> {
    let instruct = instruct.with_temperature(cfg.temperature);
    let Some(base) = base else {
        let valid = cfg.truncation.apply(&instruct)?;
        return Ok((restrict_to_valid(&instruct, &valid)?, valid));
    };
    let base = base.with_temperature(cfg.temperature);
    if cfg.pre_truncation_mix {
        let mixed = conformative_mix(&instruct, &base, &ValidSet::all(instruct.vocab_size()), cfg.gamma)?;
        let valid = cfg.truncation.apply(&mixed)?;
        Ok((restrict_to_valid(&mixed, &valid)?, valid))
    } else {
        let valid = cfg.truncation.apply(&instruct)?;
        Ok((conformative_mix(&instruct, &base, &valid, cfg.gamma)?, valid))
    }
}

fn fetch(p: &dyn DistributionProvider, ctx: &[u32], step: usize, expected: usize) -> Result<LogProbVector> {
    let d = p.next_logprobs(ctx).map_err(|e| at_step(step, e))?;
    if d.vocab_size() != expected {
        return Err(Error::VocabDrift {
            step,
            expected,
            got: d.vocab_size(),
        });
    }
    Ok(d)
}

fn at_step(step: usize, e: Error) -> Error {
    match e {
        Error::VocabDrift { .. } | Error::AtStep { .. } => e,
        other => Error::AtStep {
            step,
            source: Box::new(other),
        },
    }
}

/// Autoregressive sampling from `instruct`, optionally steered towards
/// `base`. The random stream is seeded from `cfg.seed` alone, so equal
/// inputs give equal outputs.
pub fn generate_sequence(
    instruct: &dyn DistributionProvider,
    base: Option<&dyn DistributionProvider>,
    prompt: &[u32],
    stop_tokens: &[u32],
    cfg: &DecodeConfig,
) -> Result<Generation> {
    cfg.validate()?;
    let vocab = instruct.vocab_size();
    if let Some(b) = base {
        if b.vocab_size() != vocab {
            return Err(Error::VocabMismatch(format!(
                "instruct has {vocab} tokens, base has {}",
                b.vocab_size()
            )));
        }
    }
    let is_stop = |t: u32| stop_tokens.contains(&t) || cfg.stop_tokens.contains(&t);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut context = prompt.to_vec();
    let mut tokens = Vec::new();
    let mut steps = Vec::new();

    for step in 0..cfg.max_tokens {
        let i = fetch(instruct, &context, step, vocab)?;
        let b = base.map(|p| fetch(p, &context, step, vocab)).transpose()?;
        let (dist, valid) = step_distribution(&i, b.as_ref(), cfg).map_err(|e| at_step(step, e))?;
        let token = sample_token(&dist, &mut rng).map_err(|e| at_step(step, e))?;
        steps.push(StepRecord {
            token,
            valid_size: valid.len(),
            valid_mass: valid.mass(),
            probability: dist.values()[token as usize].exp(),
        });
        if is_stop(token) {
            return Ok(Generation {
                tokens,
                steps,
                stop_reason: StopReason::StopToken,
            });
        }
        tokens.push(token);
        context.push(token);
    }
    Ok(Generation {
        tokens,
        steps,
        stop_reason: StopReason::MaxTokens,
    })
}
