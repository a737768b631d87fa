use std::sync::Arc;

use divergauge_core::decoding::TextCodec;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    #[default]
    Completion,
    Instruction,
}

pub fn build_prompt(writing_prompt: &str, incipit: &str, style: PromptStyle) -> String {
    match style {
        PromptStyle::Completion => {
            format!("Writing prompt: {writing_prompt}\n\nThe story is as follows: {incipit}")
        }
        PromptStyle::Instruction if incipit.is_empty() => {
            format!("Writing prompt: {writing_prompt}\n\nWrite a story")
        }
        PromptStyle::Instruction => {
            format!("Writing prompt: {writing_prompt}\n\nWrite a story\n\n{incipit}")
        }
    }
}

/// How incipit tokens are counted.
#[derive(Clone, Default)]
pub enum IncipitTokenizer {
    /// Whitespace words of the original text, re-joined with single spaces.
    #[default]
    CoreSimple,
    /// The model's own tokenizer: encode, keep a prefix, decode.
    Delegated(Arc<dyn TextCodec>),
}

impl std::fmt::Debug for IncipitTokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::CoreSimple => f.write_str("CoreSimple"),
            Self::Delegated(_) => f.write_str("Delegated"),
        }
    }
}

pub fn make_incipit(text: &str, n_tokens: usize, tokenizer: &IncipitTokenizer) -> Result<String> {
    if text.trim().is_empty() {
        return Err(HarnessError::Config("cannot take an incipit of an empty text".into()));
    }
    match tokenizer {
        IncipitTokenizer::CoreSimple => Ok(text.split_whitespace().take(n_tokens).collect::<Vec<_>>().join(" ")),
        IncipitTokenizer::Delegated(codec) => {
            let ids = codec.encode(text)?;
            Ok(codec.decode(&ids[..ids.len().min(n_tokens)])?)
        }
    }
}
