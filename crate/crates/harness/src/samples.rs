use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use divergauge_core::decoding::StopReason;
use serde::{Deserialize, Serialize};

use crate::dataset::PromptRecord;
use crate::error::{HarnessError, Result};
use crate::prompt::{make_incipit, IncipitTokenizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Generated,
    Reference,
}

/// One line of a sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub prompt_id: String,
    pub source: Source,
    /// Configuration name, e.g. `A`, `B`, `base` or `reference`.
    pub label: String,
    pub incipit: String,
    /// For generated samples the continuation only; for references the
    /// full human text.
    pub text: String,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
}

impl SampleRecord {
    /// The text that gets measured. Generated samples are scored together
    /// with the incipit they continue, so they line up with the human
    /// references, which contain it already.
    pub fn evaluated_text(&self, include_incipit: bool) -> String {
        match self.source {
            Source::Generated if include_incipit && !self.incipit.is_empty() => {
                if self.text.is_empty() {
                    self.incipit.clone()
                } else {
                    format!("{} {}", self.incipit, self.text)
                }
            }
            _ => self.text.clone(),
        }
    }
}

pub const REFERENCE_LABEL: &str = "reference";

/// The human responses of each prompt as reference samples.
pub fn reference_samples(
    prompts: &[PromptRecord],
    per_prompt: usize,
    incipit_tokens: usize,
    tokenizer: &IncipitTokenizer,
) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    for p in prompts {
        for (i, r) in p.responses.iter().take(per_prompt).enumerate() {
            out.push(SampleRecord {
                id: format!("{}/{REFERENCE_LABEL}/{i}", p.id),
                prompt_id: p.id.clone(),
                source: Source::Reference,
                label: REFERENCE_LABEL.into(),
                incipit: make_incipit(r, incipit_tokens, tokenizer)?,
                text: r.clone(),
                config_hash: REFERENCE_LABEL.into(),
                seed: 0,
                stop_reason: None,
            });
        }
    }
    Ok(out)
}

pub fn write_samples<W: Write>(samples: &[SampleRecord], mut out: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_samples(samples: &[SampleRecord], path: &Path) -> Result<()> {
    write_samples(samples, BufWriter::new(File::create(path)?))
}

pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::Record {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<SampleRecord>> {
    read_samples(BufReader::new(File::open(path)?)).map_err(|e| match e {
        HarnessError::Record { line, message } => HarnessError::File {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        },
        other => other,
    })
}
