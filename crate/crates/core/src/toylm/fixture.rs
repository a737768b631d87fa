//! Deterministic stand-ins for a real prompt/response dataset and a
//! base/instruct model pair, built from the story grammar.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::{story, training_corpus, GENRES};
use super::model::{NGramConfig, NGramLM};
use crate::error::Result;
use crate::features::tokenize;

/// Shape of one line of a prompt/response dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub id: String,
    pub prompt: String,
    pub responses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub corpus_tokens: usize,
    pub responses_per_prompt: usize,
    pub sharpen_tau: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            corpus_tokens: 220_000,
            responses_per_prompt: 56,
            sharpen_tau: 0.6,
        }
    }
}

/// Meta-commentary of the kind a dataset filter should drop.
pub const COMMENTARY: &[&str] = &[
    "This is my first story here, please be gentle.",
    "Feedback welcome! I wrote this on my phone.",
    "Edit: thanks for the gold, kind stranger.",
    "Not really a story but here goes.",
];

/// Tokenized training documents for the base model.
pub fn training_documents(spec: &FixtureSpec) -> Vec<Vec<String>> {
    training_corpus(spec.seed, spec.corpus_tokens)
        .iter()
        .map(|s| tokenize(s))
        .collect()
}

/// Base model and its temperature-sharpened counterpart.
pub fn fixture_models(spec: &FixtureSpec) -> Result<(NGramLM, NGramLM)> {
    let base = NGramLM::train(&training_documents(spec), NGramConfig::default())?;
    let instruct = base.sharpen(spec.sharpen_tau)?;
    Ok((base, instruct))
}

/// One record per genre with `responses_per_prompt` stories, a few of them
/// replaced by commentary or left empty, plus one short record that falls
/// under a 50-response threshold.
pub fn fixture_dataset(spec: &FixtureSpec) -> Vec<FixtureRecord> {
    // Offset keeps the reference stories distinct from the training text.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_da7a);
    let mut out: Vec<FixtureRecord> = GENRES
        .iter()
        .map(|g| {
            let mut responses: Vec<String> = (0..spec.responses_per_prompt).map(|_| story(g, &mut rng)).collect();
            for c in COMMENTARY {
                let at = rng.random_range(0..=responses.len());
                responses.insert(at, c.to_string());
            }
            let at = rng.random_range(0..=responses.len());
            responses.insert(at, String::new());
            FixtureRecord {
                id: format!("wp-{}", g.name),
                prompt: g.prompt.to_string(),
                responses,
            }
        })
        .collect();
    out.push(FixtureRecord {
        id: "wp-short".into(),
        prompt: "A lighthouse keeper sees a ship that vanished a hundred years ago.".into(),
        responses: (0..30).map(|_| story(&GENRES[0], &mut rng)).collect(),
    });
    out
}
