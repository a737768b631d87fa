use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use divergauge_core::decoding::{
    generate_sequence, AdapterClient, DecodeConfig, DistributionProvider, ModelRole, TextCodec,
};
use divergauge_core::toylm::{fixture_models, load_ngram, FixtureSpec, NGramLM};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ExperimentConfig, IncipitMode, ProviderSpec, RunModel, RunSpec};
use crate::dataset::PromptRecord;
use crate::error::{HarnessError, Result};
use crate::prompt::{build_prompt, make_incipit, IncipitTokenizer};
use crate::samples::{reference_samples, save_samples, SampleRecord, Source};
use crate::seeds::{derive_seed, sha256_hex};

/// A base/instruct pair plus the tokenizer they share.
#[derive(Clone)]
pub struct Providers {
    pub instruct: Arc<dyn DistributionProvider>,
    pub base: Arc<dyn DistributionProvider>,
    pub codec: Arc<dyn TextCodec>,
    pub stop_tokens: Vec<u32>,
    /// Identifies the models in configuration hashes.
    pub descriptor: serde_json::Value,
}

impl Providers {
    pub fn from_ngrams(base: NGramLM, instruct: NGramLM, descriptor: serde_json::Value) -> Result<Self> {
        if base.vocab() != instruct.vocab() {
            return Err(HarnessError::Config("base and instruct n-gram models use different vocabularies".into()));
        }
        let stop_tokens = instruct.stop_tokens();
        let instruct = Arc::new(instruct);
        Ok(Self {
            codec: instruct.clone(),
            instruct,
            base: Arc::new(base),
            stop_tokens,
            descriptor,
        })
    }

    pub fn from_spec(spec: &ProviderSpec) -> Result<Self> {
        match spec {
            ProviderSpec::Toylm { base, instruct } => {
                let hash = |p: &Path| -> Result<String> { Ok(sha256_hex(&fs::read(p)?)) };
                let descriptor = json!({
                    "kind": "toylm",
                    "base_sha256": hash(base)?,
                    "instruct_sha256": hash(instruct)?,
                });
                Self::from_ngrams(load_ngram(base)?, load_ngram(instruct)?, descriptor)
            }
            ProviderSpec::Fixture { seed } => {
                let fs = FixtureSpec {
                    seed: *seed,
                    ..FixtureSpec::default()
                };
                let (base, instruct) = fixture_models(&fs)?;
                let descriptor = json!({
                    "kind": "fixture",
                    "seed": seed,
                    "corpus_tokens": fs.corpus_tokens,
                    "sharpen_tau": fs.sharpen_tau,
                });
                Self::from_ngrams(base, instruct, descriptor)
            }
            ProviderSpec::Adapter { command } => {
                let client = Arc::new(AdapterClient::spawn(&command[0], &command[1..])?);
                let instruct = Arc::new(client.model(ModelRole::Instruct));
                Ok(Self {
                    codec: instruct.clone(),
                    instruct,
                    base: Arc::new(client.model(ModelRole::Base)),
                    stop_tokens: client.stop_tokens().to_vec(),
                    descriptor: json!({"kind": "adapter", "command": command}),
                })
            }
        }
    }

    fn for_run(&self, model: RunModel) -> (&dyn DistributionProvider, Option<&dyn DistributionProvider>) {
        match model {
            RunModel::Instruct => (self.instruct.as_ref(), None),
            RunModel::Base => (self.base.as_ref(), None),
            RunModel::Conformative => (self.instruct.as_ref(), Some(self.base.as_ref())),
        }
    }
}

/// Hash of everything that determines a run's outputs apart from the
/// global seed and the prompts.
pub fn config_hash(cfg: &ExperimentConfig, run: &RunSpec, providers: &Providers) -> String {
    let canonical = json!({
        "label": run.label,
        "model": run.model,
        "decode": cfg.run_decode(run),
        "prompt_style": cfg.run_style(run),
        "incipit_tokens": cfg.incipit_tokens,
        "incipit_mode": cfg.incipit_mode,
        "provider": providers.descriptor,
    });
    sha256_hex(canonical.to_string().as_bytes())[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub label: String,
    pub prompt_id: String,
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

/// One prompt's work: the incipits it uses, shared by every run.
struct PromptJob<'a> {
    record: &'a PromptRecord,
    incipits: Vec<String>,
}

fn prompt_jobs<'a>(
    cfg: &ExperimentConfig,
    prompts: &'a [PromptRecord],
    tokenizer: &IncipitTokenizer,
) -> Result<Vec<PromptJob<'a>>> {
    prompts
        .iter()
        .map(|p| {
            let incipits = p
                .responses
                .iter()
                .take(cfg.samples_per_prompt)
                .map(|r| make_incipit(r, cfg.incipit_tokens, tokenizer))
                .collect::<Result<_>>()?;
            Ok(PromptJob { record: p, incipits })
        })
        .collect()
}

fn incipit_tokenizer(cfg: &ExperimentConfig, providers: &Providers) -> IncipitTokenizer {
    match cfg.incipit_mode {
        IncipitMode::CoreSimple => IncipitTokenizer::CoreSimple,
        IncipitMode::Provider => IncipitTokenizer::Delegated(providers.codec.clone()),
    }
}

/// Samples for one run, in prompt order then incipit order, plus the
/// samples that failed.
pub fn generate_run(
    cfg: &ExperimentConfig,
    run: &RunSpec,
    prompts: &[PromptRecord],
    providers: &Providers,
) -> Result<(Vec<SampleRecord>, Vec<FailureRecord>)> {
    let jobs = prompt_jobs(cfg, prompts, &incipit_tokenizer(cfg, providers))?;
    Ok(generate_jobs(cfg, run, &jobs, providers))
}

fn generate_jobs(
    cfg: &ExperimentConfig,
    run: &RunSpec,
    jobs: &[PromptJob<'_>],
    providers: &Providers,
) -> (Vec<SampleRecord>, Vec<FailureRecord>) {
    let hash = config_hash(cfg, run, providers);
    let decode = cfg.run_decode(run);
    let style = cfg.run_style(run);
    let (model, base) = providers.for_run(run.model);

    let per_prompt: Vec<Vec<std::result::Result<SampleRecord, FailureRecord>>> = jobs
        .par_iter()
        .map(|job| {
            let p = job.record;
            job.incipits
                .iter()
                .enumerate()
                .map(|(i, incipit)| {
                    let seed = derive_seed(cfg.seed, &p.id, i);
                    let one = || -> Result<SampleRecord> {
                        let prompt = providers.codec.encode(&build_prompt(&p.prompt, incipit, style))?;
                        let d = DecodeConfig { seed, ..decode.clone() };
                        let g = generate_sequence(model, base, &prompt, &providers.stop_tokens, &d)?;
                        Ok(SampleRecord {
                            id: format!("{}/{}/{i}", p.id, run.label),
                            prompt_id: p.id.clone(),
                            source: Source::Generated,
                            label: run.label.clone(),
                            incipit: incipit.clone(),
                            text: providers.codec.decode(&g.tokens)?,
                            config_hash: hash.clone(),
                            seed,
                            stop_reason: Some(g.stop_reason),
                        })
                    };
                    one().map_err(|e| FailureRecord {
                        label: run.label.clone(),
                        prompt_id: p.id.clone(),
                        index: i,
                        seed,
                        error: e.to_string(),
                    })
                })
                .collect()
        })
        .collect();

    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for r in per_prompt.into_iter().flatten() {
        match r {
            Ok(s) => ok.push(s),
            Err(f) => failed.push(f),
        }
    }
    (ok, failed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub model: RunModel,
    pub config_hash: String,
    pub decode: DecodeConfig,
    pub samples: usize,
    pub failures: usize,
    pub sample_file: String,
    pub sample_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub seed: u64,
    pub samples_per_prompt: usize,
    pub incipit_tokens: usize,
    pub prompts: Vec<String>,
    pub provider: serde_json::Value,
    pub reference_file: String,
    pub reference_sha256: String,
    pub runs: Vec<RunManifest>,
}

pub fn sample_file_name(label: &str) -> String {
    format!("{label}.ndjson")
}

/// Writes `reference.ndjson`, one `<label>.ndjson` and
/// `<label>.failures.ndjson` per run, and `manifest.json`. Failed samples
/// are recorded and skipped; everything else is still written.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    prompts: &[PromptRecord],
    providers: &Providers,
    out_dir: &Path,
) -> Result<ExperimentManifest> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let tokenizer = incipit_tokenizer(cfg, providers);
    let jobs = prompt_jobs(cfg, prompts, &tokenizer)?;

    let refs = reference_samples(prompts, cfg.samples_per_prompt, cfg.incipit_tokens, &tokenizer)?;
    let ref_name = sample_file_name(crate::samples::REFERENCE_LABEL);
    save_samples(&refs, &out_dir.join(&ref_name))?;

    let mut runs = Vec::new();
    for run in &cfg.runs {
        let (samples, failures) = generate_jobs(cfg, run, &jobs, providers);
        let name = sample_file_name(&run.label);
        let path = out_dir.join(&name);
        save_samples(&samples, &path)?;
        write_failures(&failures, &out_dir.join(format!("{}.failures.ndjson", run.label)))?;
        runs.push(RunManifest {
            label: run.label.clone(),
            model: run.model,
            config_hash: config_hash(cfg, run, providers),
            decode: cfg.run_decode(run),
            samples: samples.len(),
            failures: failures.len(),
            sample_sha256: sha256_hex(&fs::read(&path)?),
            sample_file: name,
        });
    }
    let manifest = ExperimentManifest {
        seed: cfg.seed,
        samples_per_prompt: cfg.samples_per_prompt,
        incipit_tokens: cfg.incipit_tokens,
        prompts: prompts.iter().map(|p| p.id.clone()).collect(),
        provider: providers.descriptor.clone(),
        reference_sha256: sha256_hex(&fs::read(out_dir.join(&ref_name))?),
        reference_file: ref_name,
        runs,
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

fn write_failures(failures: &[FailureRecord], path: &PathBuf) -> Result<()> {
    let mut s = String::new();
    for f in failures {
        s.push_str(&serde_json::to_string(f)?);
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}
