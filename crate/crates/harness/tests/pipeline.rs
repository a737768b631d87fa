use std::collections::HashMap;
use std::fs;
use std::sync::OnceLock;

use divergauge::config::{ExperimentConfig, ProviderSpec, RunModel, RunSpec};
use divergauge::dataset::{ingest, IngestConfig, PromptRecord, DEFAULT_COMMENTARY_PATTERNS};
use divergauge::evaluate::{compare, evaluate, Embeddings, EvalConfig, MAUVE_LITE, PRECISION, RECALL, VS_NGRAM};
use divergauge::experiment::{run_experiment, Providers};
use divergauge::samples::{load_samples, SampleRecord};
use divergauge::HarnessError;
use divergauge_core::toylm::{fixture_dataset, FixtureSpec};

fn providers() -> &'static Providers {
    static P: OnceLock<Providers> = OnceLock::new();
    P.get_or_init(|| Providers::from_spec(&ProviderSpec::Fixture { seed: 7 }).unwrap())
}

fn prompts() -> Vec<PromptRecord> {
    let mut text = String::new();
    for r in fixture_dataset(&FixtureSpec::default()) {
        text.push_str(&serde_json::to_string(&r).unwrap());
        text.push('\n');
    }
    let cfg = IngestConfig::with_patterns(DEFAULT_COMMENTARY_PATTERNS).unwrap();
    ingest(text.as_bytes(), &cfg).unwrap().0
}

fn config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ProviderSpec::Fixture { seed: 7 });
    cfg.seed = seed;
    cfg
}

#[test]
fn ingest_keeps_full_prompts_only() {
    let p = prompts();
    assert_eq!(p.len(), 10);
    for r in &p {
        assert_eq!(r.responses.len(), 50);
        assert!(r.responses.iter().all(|t| !t.is_empty() && !t.starts_with("Feedback")));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let p = &prompts()[..2];
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let m = run_experiment(&config(11), p, providers(), d1.path()).unwrap();
    run_experiment(&config(11), p, providers(), d2.path()).unwrap();
    assert_eq!(m.runs[0].samples, 100);
    for f in ["reference.ndjson", "A.ndjson", "B.ndjson", "manifest.json"] {
        assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
    let d3 = tempfile::tempdir().unwrap();
    run_experiment(&config(12), p, providers(), d3.path()).unwrap();
    assert_ne!(fs::read(d1.path().join("A.ndjson")).unwrap(), fs::read(d3.path().join("A.ndjson")).unwrap());
}

#[test]
fn runs_share_incipits_and_seeds() {
    let p = &prompts()[..2];
    let d = tempfile::tempdir().unwrap();
    run_experiment(&config(3), p, providers(), d.path()).unwrap();
    let a = load_samples(&d.path().join("A.ndjson")).unwrap();
    let b = load_samples(&d.path().join("B.ndjson")).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x.prompt_id, &x.incipit, x.seed), (&y.prompt_id, &y.incipit, y.seed));
        assert_ne!(x.config_hash, y.config_hash);
    }
}

fn relabel(samples: &[SampleRecord], label: &str) -> Vec<SampleRecord> {
    samples
        .iter()
        .map(|s| SampleRecord {
            id: format!("{}/{label}", s.id),
            label: label.into(),
            ..s.clone()
        })
        .collect()
}

#[test]
fn self_comparison_is_perfect() {
    let p = &prompts()[..3];
    let d = tempfile::tempdir().unwrap();
    let mut cfg = config(5);
    cfg.runs = vec![RunSpec::new("A", RunModel::Instruct, None)];
    run_experiment(&cfg, p, providers(), d.path()).unwrap();
    let a = load_samples(&d.path().join("A.ndjson")).unwrap();
    let mut all = a.clone();
    all.extend(relabel(&a, "copy"));
    let eval = EvalConfig {
        reference: "A".into(),
        comparisons: vec![("A".into(), "A".into())],
        ..EvalConfig::default()
    };
    let r = evaluate(&all, &eval).unwrap();
    assert_eq!(r.pooled_value(PRECISION, "copy"), Some(1.0));
    assert_eq!(r.pooled_value(RECALL, "copy"), Some(1.0));
    assert!(r.pooled_value(MAUVE_LITE, "copy").unwrap() >= 0.99);
    let t = compare(&r, VS_NGRAM, "A", "A").unwrap();
    assert_eq!((t.result.t, t.result.p_value), (0.0, 0.5));
}

#[test]
fn missing_embeddings_skip_only_embedding_metrics() {
    let p = &prompts()[..2];
    let d = tempfile::tempdir().unwrap();
    run_experiment(&config(5), p, providers(), d.path()).unwrap();
    let mut all = load_samples(&d.path().join("reference.ndjson")).unwrap();
    all.extend(load_samples(&d.path().join("A.ndjson")).unwrap());
    let eval = EvalConfig {
        embeddings: Embeddings::Table(HashMap::new()),
        ..EvalConfig::default()
    };
    let r = evaluate(&all, &eval).unwrap();
    assert!(!r.notices.is_empty());
    assert_eq!(r.series(VS_NGRAM, "A").len(), 2);
    assert!(r.pooled.is_empty());
}

#[test]
fn mixed_hashes_are_refused() {
    let p = &prompts()[..1];
    let d = tempfile::tempdir().unwrap();
    run_experiment(&config(5), p, providers(), d.path()).unwrap();
    let mut a = load_samples(&d.path().join("A.ndjson")).unwrap();
    a[3].config_hash = "0000000000000000".into();
    let err = evaluate(&a, &EvalConfig::default()).unwrap_err();
    assert!(matches!(err, HarnessError::MixedConfig { .. }), "{err}");
}

#[test]
fn adapter_failures_are_isolated() {
    let stub = env!("CARGO_BIN_EXE_stub-adapter").to_string();
    let command = vec![stub, "--serve".into(), "--fail-request".into(), "5".into()];
    let spec = ProviderSpec::Adapter { command };
    let providers = Providers::from_spec(&spec).unwrap();
    let mut cfg = ExperimentConfig::new(spec);
    cfg.samples_per_prompt = 4;
    cfg.decode.max_tokens = 12;
    cfg.runs = vec![RunSpec::new("A", RunModel::Instruct, None)];
    let prompt = PromptRecord {
        id: "p1".into(),
        prompt: "the fox".into(),
        responses: (0..4).map(|i| format!("the fox ran over a hill {i}")).collect(),
    };
    let d = tempfile::tempdir().unwrap();
    let m = run_experiment(&cfg, &[prompt], &providers, d.path()).unwrap();
    assert_eq!((m.runs[0].samples, m.runs[0].failures), (3, 1));
    let failures = fs::read_to_string(d.path().join("A.failures.ndjson")).unwrap();
    assert!(failures.contains("injected failure"));
}
