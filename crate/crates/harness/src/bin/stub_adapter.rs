//! Minimal model adapter with fixed logit tables, for exercising the stdio
//! protocol and the embedding hand-off without any ML runtime.
//!
//! `--serve` speaks the NDJSON protocol on stdin/stdout. `--embed --out F`
//! reads `{id, text}` lines on stdin and writes a DGEM file with the
//! built-in projection embedder.

use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use divergauge_core::decoding::live::{Reply, Request};
use divergauge_core::decoding::ModelRole;
use divergauge_core::features::{write_embeddings, ProjectionEmbedder};
use serde::Deserialize;

const WORDS: [&str; 12] = [
    "<s>", "</s>", "<unk>", "the", "fox", "ran", "over", "a", "hill", "and", "slept", "home",
];
const STOP: u32 = 1;

#[derive(Parser)]
struct Args {
    #[arg(long)]
    serve: bool,
    #[arg(long)]
    embed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Answer the n-th logits request (from 1) with an error frame.
    #[arg(long)]
    fail_request: Option<usize>,
    /// Report this vocabulary size instead of the real one.
    #[arg(long)]
    claim_vocab: Option<usize>,
}

/// Fixed table: the instruct model strongly prefers the successor of the
/// last token, the base model only mildly.
fn stub_logits(role: ModelRole, context: &[u32]) -> Vec<f64> {
    let v = WORDS.len();
    let last = context.last().copied().unwrap_or(0) as usize;
    let scale = match role {
        ModelRole::Instruct => 2.0,
        ModelRole::Base => 0.5,
    };
    (0..v)
        .map(|i| {
            let distance = (i + v - (last + 1) % v) % v;
            -(distance as f64) * scale
        })
        .collect()
}

fn tokenize(text: &str) -> Vec<u32> {
    text.split_whitespace()
        .map(|w| WORDS.iter().position(|x| *x == w).unwrap_or(2) as u32)
        .collect()
}

fn detokenize(ids: &[u32]) -> Option<String> {
    let words: Option<Vec<&str>> = ids
        .iter()
        .filter(|&&i| i > 2)
        .map(|&i| WORDS.get(i as usize).copied())
        .collect();
    words.map(|w| w.join(" "))
}

fn send(out: &mut impl Write, reply: &Reply) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, reply)?;
    out.write_all(b"\n")?;
    out.flush()
}

fn serve(args: &Args) -> std::io::Result<()> {
    let stdin = std::io::stdin().lock();
    let mut out = BufWriter::new(std::io::stdout().lock());
    send(
        &mut out,
        &Reply::Hello {
            vocab_size: args.claim_vocab.unwrap_or(WORDS.len()),
            stop_tokens: vec![STOP],
        },
    )?;
    let mut logits_seen = 0;
    for line in stdin.lines() {
        let line = line?;
        let reply = match serde_json::from_str::<Request>(&line) {
            Err(e) => Reply::Error {
                message: format!("bad request: {e}"),
            },
            Ok(Request::Bye) => {
                send(&mut out, &Reply::Bye)?;
                return Ok(());
            }
            Ok(Request::Logits { model, context }) => {
                logits_seen += 1;
                if args.fail_request == Some(logits_seen) {
                    Reply::Error {
                        message: "injected failure".into(),
                    }
                } else {
                    Reply::Logits {
                        values: stub_logits(model, &context),
                    }
                }
            }
            Ok(Request::Tokenize { text }) => Reply::Tokens { ids: tokenize(&text) },
            Ok(Request::Detokenize { ids }) => match detokenize(&ids) {
                Some(text) => Reply::Text { text },
                None => Reply::Error {
                    message: "unknown token id".into(),
                },
            },
        };
        send(&mut out, &reply)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct EmbedLine {
    id: String,
    text: String,
}

fn embed(out: &PathBuf) -> Result<(), String> {
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    for line in std::io::stdin().lock().lines() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let l: EmbedLine = serde_json::from_str(&line).map_err(|e| e.to_string())?;
        ids.push(l.id);
        texts.push(l.text);
    }
    let e = ProjectionEmbedder::default().embed(&ids, &texts).map_err(|e| e.to_string())?;
    write_embeddings(&e, out).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = if args.embed {
        match &args.out {
            Some(out) => embed(out),
            None => Err("--embed needs --out".into()),
        }
    } else if args.serve {
        serve(&args).map_err(|e| e.to_string())
    } else {
        Err("pass --serve or --embed".into())
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", serde_json::json!({"type": "error", "message": e}));
            ExitCode::FAILURE
        }
    }
}
