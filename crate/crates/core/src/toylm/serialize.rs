//! Line-delimited JSON model files: one header line, then one line per
//! context in ascending order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{validate_config, ContextCounts, NGramConfig, NGramLM, Sharpening, Vocab};
use crate::error::{Error, Result};

const FORMAT: &str = "divergauge-ngram";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    config: NGramConfig,
    sharpening: Sharpening,
    vocab: Vec<String>,
    contexts: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextLine {
    context: Vec<u32>,
    total: u64,
    next: Vec<(u32, u64)>,
}

pub fn write_ngram<W: Write>(lm: &NGramLM, mut out: W) -> Result<()> {
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        config: lm.config,
        sharpening: lm.sharpening,
        vocab: lm.vocab.words().to_vec(),
        contexts: lm.contexts.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for (ctx, c) in &lm.contexts {
        serde_json::to_writer(
            &mut out,
            &ContextLine {
                context: ctx.clone(),
                total: c.total,
                next: c.next.clone(),
            },
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("n-gram file line {line}: {msg}"))
}

pub fn read_ngram<R: BufRead>(input: R) -> Result<NGramLM> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let header: Header = serde_json::from_str(&first?).map_err(|e| bad(1, e))?;
    if header.format != FORMAT {
        return Err(bad(1, format!("format {:?}, expected {FORMAT:?}", header.format)));
    }
    if header.version != VERSION {
        return Err(bad(1, format!("unsupported version {}", header.version)));
    }
    validate_config(&header.config)?;
    let vocab = Vocab::from_words(header.vocab)?;
    let v = vocab.len();
    let mut contexts = BTreeMap::new();
    for (n, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: ContextLine = serde_json::from_str(&line).map_err(|e| bad(n, e))?;
        if c.context.len() >= header.config.order {
            return Err(bad(n, "context longer than order - 1"));
        }
        if c.context.iter().chain(c.next.iter().map(|(id, _)| id)).any(|&id| id as usize >= v) {
            return Err(bad(n, "token id outside the vocabulary"));
        }
        if !c.next.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(bad(n, "next-token ids not strictly ascending"));
        }
        if c.next.iter().map(|(_, k)| k).sum::<u64>() != c.total {
            return Err(bad(n, "total does not match the counts"));
        }
        let next = ContextCounts {
            total: c.total,
            next: c.next,
        };
        if contexts.insert(c.context, next).is_some() {
            return Err(bad(n, "duplicate context"));
        }
    }
    if contexts.len() != header.contexts {
        return Err(bad(
            1,
            format!("header announces {} contexts, file has {}", header.contexts, contexts.len()),
        ));
    }
    if !contexts.contains_key(&Vec::new()) {
        return Err(bad(1, "missing the empty (unigram) context"));
    }
    Ok(NGramLM {
        config: header.config,
        vocab,
        sharpening: header.sharpening,
        contexts,
    })
}

pub fn save_ngram(lm: &NGramLM, path: &Path) -> Result<()> {
    write_ngram(lm, BufWriter::new(File::create(path)?))
}

pub fn load_ngram(path: &Path) -> Result<NGramLM> {
    read_ngram(BufReader::new(File::open(path)?))
}
