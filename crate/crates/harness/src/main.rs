use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};

use clap::{Args, Parser, Subcommand};
use divergauge::config::{load_config, ExperimentConfig, ProviderSpec, RunModel, RunSpec};
use divergauge::dataset::{ingest_file, load_prompts, save_prompts, IngestConfig, DEFAULT_COMMENTARY_PATTERNS};
use divergauge::evaluate::{compare, evaluate_files, Embeddings, EvalConfig, RunReport};
use divergauge::experiment::{run_experiment, Providers};
use divergauge::report::write_report;
use divergauge::samples::{load_samples, REFERENCE_LABEL};
use divergauge::{HarnessError, Result};
use divergauge_core::features::{read_embeddings, write_embeddings, ProjectionEmbedder};
use divergauge_core::toylm::{fixture_dataset, fixture_models, save_ngram, FixtureSpec};

#[derive(Parser)]
#[command(name = "divergauge", version, about = "Measure and recover output diversity of language models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Filter a raw prompt/response dataset.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        min_responses: usize,
        #[arg(long, default_value_t = 50)]
        keep: usize,
        /// Commentary regex; repeatable. Replaces the built-in list.
        #[arg(long = "pattern")]
        patterns: Vec<String>,
    },
    /// Write the synthetic dataset, the two n-gram models and a config.
    Fixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = FixtureSpec::default().seed)]
        seed: u64,
    },
    /// Generate samples for every run in a config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the config and DIVERGAUGE_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Embed sample files into a DGEM file.
    Embed {
        #[arg(long = "samples", required = true, num_args = 1..)]
        samples: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Adapter program and arguments; it receives `--embed --out <file>`
        /// and reads `{id, text}` lines on stdin. Without it the built-in
        /// projection embedder is used.
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        adapter: Vec<String>,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Compute metrics over sample files.
    Eval {
        #[arg(long = "samples", required = true, num_args = 1..)]
        samples: Vec<PathBuf>,
        #[arg(long, default_value = REFERENCE_LABEL)]
        reference: String,
        /// DGEM files with one row per sample id.
        #[arg(long, num_args = 1..)]
        embeddings: Vec<PathBuf>,
        /// Skip embedding-based metrics.
        #[arg(long, conflicts_with = "embeddings")]
        no_embeddings: bool,
        /// `A:B` tests `mean(A) > mean(B)`; repeatable.
        #[arg(long = "compare")]
        comparisons: Vec<String>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        projection: ProjectionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired one-tailed t-test between two configurations of a report.
    Ttest {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        metric: String,
        /// Alternative hypothesis is `mean(a) > mean(b)`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Render Markdown and CSV tables from a report.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct TextArgs {
    /// Measure generated continuations without their incipit.
    #[arg(long)]
    no_incipit: bool,
}

#[derive(Args)]
struct ProjectionArgs {
    #[arg(long, default_value_t = ProjectionEmbedder::default().dim)]
    projection_dim: usize,
    #[arg(long, default_value_t = ProjectionEmbedder::default().seed)]
    projection_seed: u64,
}

impl ProjectionArgs {
    fn embedder(&self) -> ProjectionEmbedder {
        ProjectionEmbedder {
            dim: self.projection_dim,
            seed: self.projection_seed,
            ..ProjectionEmbedder::default()
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Ingest {
            input,
            output,
            min_responses,
            keep,
            patterns,
        } => {
            let mut cfg = if patterns.is_empty() {
                IngestConfig::with_patterns(DEFAULT_COMMENTARY_PATTERNS)?
            } else {
                IngestConfig::with_patterns(&patterns)?
            };
            cfg.min_responses = min_responses;
            cfg.keep = keep;
            let (records, stats) = ingest_file(&input, &cfg)?;
            save_prompts(&records, &output)?;
            println!("{}", serde_json::to_string(&stats)?);
        }
        Cmd::Fixture { out_dir, seed } => write_fixture(&out_dir, seed)?,
        Cmd::Gen {
            config,
            prompts,
            out_dir,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let prompts = load_prompts(&prompts)?;
            let providers = Providers::from_spec(&cfg.provider)?;
            let manifest = run_experiment(&cfg, &prompts, &providers, &out_dir)?;
            let failures: usize = manifest.runs.iter().map(|r| r.failures).sum();
            for r in &manifest.runs {
                eprintln!("{}: {} samples, {} failed", r.label, r.samples, r.failures);
            }
            if failures > 0 {
                eprintln!("warning: {failures} samples failed; see the *.failures.ndjson files");
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Embed {
            samples,
            out,
            adapter,
            text,
            projection,
        } => {
            let mut all = Vec::new();
            for p in &samples {
                all.extend(load_samples(p)?);
            }
            let ids: Vec<String> = all.iter().map(|s| s.id.clone()).collect();
            let texts: Vec<String> = all.iter().map(|s| s.evaluated_text(!text.no_incipit)).collect();
            if adapter.is_empty() {
                write_embeddings(&projection.embedder().embed(&ids, &texts)?, &out)?;
            } else {
                embed_with_adapter(&adapter, &ids, &texts, &out)?;
            }
            eprintln!("wrote {} rows to {}", ids.len(), out.display());
        }
        Cmd::Eval {
            samples,
            reference,
            embeddings,
            no_embeddings,
            comparisons,
            k,
            text,
            projection,
            out,
        } => {
            let comparisons = comparisons
                .iter()
                .map(|c| {
                    c.split_once(':')
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .ok_or_else(|| HarnessError::Config(format!("--compare expects A:B, got {c:?}")))
                })
                .collect::<Result<_>>()?;
            let embeddings = if no_embeddings {
                Embeddings::Disabled
            } else if embeddings.is_empty() {
                Embeddings::Projection(projection.embedder())
            } else {
                Embeddings::from_files(&embeddings)?
            };
            let cfg = EvalConfig {
                reference,
                include_incipit: !text.no_incipit,
                pr_k: k,
                comparisons,
                embeddings,
                ..EvalConfig::default()
            };
            let report = evaluate_files(&samples, &cfg)?;
            for n in &report.notices {
                eprintln!("notice: {n}");
            }
            std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
        }
        Cmd::Ttest { report, metric, a, b } => {
            let r = read_report(&report)?;
            println!("{}", serde_json::to_string_pretty(&compare(&r, &metric, &a, &b)?)?);
        }
        Cmd::Report { report, out_dir } => write_report(&read_report(&report)?, &out_dir)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn read_report(path: &Path) -> Result<RunReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_fixture(dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let spec = FixtureSpec {
        seed,
        ..FixtureSpec::default()
    };
    let mut lines = String::new();
    for r in fixture_dataset(&spec) {
        lines.push_str(&serde_json::to_string(&r)?);
        lines.push('\n');
    }
    std::fs::write(dir.join("dataset.ndjson"), lines)?;
    let (base, instruct) = fixture_models(&spec)?;
    save_ngram(&base, &dir.join("base.ngram"))?;
    save_ngram(&instruct, &dir.join("instruct.ngram"))?;
    let mut cfg = ExperimentConfig::new(ProviderSpec::Toylm {
        base: "base.ngram".into(),
        instruct: "instruct.ngram".into(),
    });
    cfg.seed = seed;
    cfg.runs.push(RunSpec::new("base", RunModel::Base, None));
    let text = toml::to_string(&cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(dir.join("experiment.toml"), text)?;
    eprintln!("wrote dataset.ndjson, base.ngram, instruct.ngram, experiment.toml to {}", dir.display());
    Ok(())
}

/// Streams `{id, text}` lines to the adapter and checks the DGEM file it
/// writes back.
fn embed_with_adapter(cmd: &[String], ids: &[String], texts: &[String], out: &Path) -> Result<()> {
    let mut child = Command::new(&cmd[0])
        .args(&cmd[1..])
        .arg("--embed")
        .arg("--out")
        .arg(out)
        .stdin(Stdio::piped())
        .stdout(Stdio::inherit())
        .stderr(Stdio::inherit())
        .spawn()?;
    {
        let mut stdin = std::io::BufWriter::new(child.stdin.take().expect("piped stdin"));
        for (id, text) in ids.iter().zip(texts) {
            serde_json::to_writer(&mut stdin, &serde_json::json!({"id": id, "text": text}))?;
            stdin.write_all(b"\n")?;
        }
        stdin.flush()?;
    }
    let status = child.wait()?;
    if !status.success() {
        return Err(HarnessError::Config(format!("embedding adapter exited with {status}")));
    }
    let e = read_embeddings(out)?;
    if e.ids() != ids {
        return Err(HarnessError::File {
            path: out.to_path_buf(),
            message: "adapter output ids do not match the input order".into(),
        });
    }
    Ok(())
}
