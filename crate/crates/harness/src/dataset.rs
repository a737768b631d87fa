use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// A writing prompt and its human responses, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub prompt: String,
    pub responses: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<String>,
    prompt: String,
    responses: Vec<String>,
}

/// Leading patterns that mark a response as author commentary rather than a
/// story.
pub const DEFAULT_COMMENTARY_PATTERNS: &[&str] = &[
    r"(?i)^\s*this is my first",
    r"(?i)^\s*first time (posting|writing)",
    r"(?i)^\s*feedback (is )?(welcome|appreciated)",
    r"(?i)^\s*edit\s*:",
    r"(?i)^\s*not (really )?a story",
    r"(?i)^\s*\[?(wp|removed|deleted)\]?\s*$",
];

#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Prompts with fewer surviving responses are dropped.
    pub min_responses: usize,
    /// Responses kept per prompt, taken from the front.
    pub keep: usize,
    pub commentary: Vec<Regex>,
}

impl IngestConfig {
    pub fn with_patterns(patterns: &[impl AsRef<str>]) -> Result<Self> {
        let commentary = patterns
            .iter()
            .map(|p| Regex::new(p.as_ref()).map_err(|e| HarnessError::Config(format!("bad pattern: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self {
            commentary,
            ..Self::default()
        })
    }

    fn is_commentary(&self, response: &str) -> bool {
        self.commentary.iter().any(|r| r.is_match(response))
    }
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            min_responses: 50,
            keep: 50,
            commentary: DEFAULT_COMMENTARY_PATTERNS
                .iter()
                .map(|p| Regex::new(p).expect("built-in pattern"))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestStats {
    pub prompts_read: usize,
    pub prompts_kept: usize,
    pub responses_dropped_as_commentary: usize,
    pub responses_dropped_empty: usize,
}

/// Reads `{prompt, responses[], id?}` lines, drops commentary and empty
/// responses, then keeps the first `keep` responses of every prompt that
/// still has at least `min_responses`. Missing ids become `p{line}`.
pub fn ingest<R: BufRead>(input: R, cfg: &IngestConfig) -> Result<(Vec<PromptRecord>, IngestStats)> {
    let mut stats = IngestStats::default();
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| HarnessError::Record {
            line: n,
            message: e.to_string(),
        })?;
        stats.prompts_read += 1;
        let id = raw.id.unwrap_or_else(|| format!("p{n}"));
        if !seen.insert(id.clone()) {
            return Err(HarnessError::Record {
                line: n,
                message: format!("duplicate prompt id {id:?}"),
            });
        }
        let mut kept = Vec::new();
        for r in raw.responses {
            if r.trim().is_empty() {
                stats.responses_dropped_empty += 1;
            } else if cfg.is_commentary(&r) {
                stats.responses_dropped_as_commentary += 1;
            } else {
                kept.push(r);
            }
        }
        if kept.len() < cfg.min_responses {
            continue;
        }
        kept.truncate(cfg.keep);
        out.push(PromptRecord {
            id,
            prompt: raw.prompt,
            responses: kept,
        });
    }
    stats.prompts_kept = out.len();
    Ok((out, stats))
}

pub fn ingest_file(path: &Path, cfg: &IngestConfig) -> Result<(Vec<PromptRecord>, IngestStats)> {
    ingest(BufReader::new(File::open(path)?), cfg)
}

pub fn write_prompts<W: Write>(records: &[PromptRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_prompts(records: &[PromptRecord], path: &Path) -> Result<()> {
    write_prompts(records, BufWriter::new(File::create(path)?))
}

/// Loads an already-ingested file without filtering.
pub fn load_prompts(path: &Path) -> Result<Vec<PromptRecord>> {
    let cfg = IngestConfig {
        min_responses: 0,
        keep: usize::MAX,
        commentary: Vec::new(),
    };
    Ok(ingest_file(path, &cfg)?.0)
}
