use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use divergauge_core::features::{
    embedding_kernel, ngram_kernel, ngram_profile, read_embeddings, tokenize, EmbeddingMatrix, ProjectionEmbedder,
    DEFAULT_NGRAM_ORDERS,
};
use divergauge_core::metrics::{
    improved_precision_recall, mauve_lite, paired_ttest_one_tailed, truncated_entropy, vendi_score, MauveConfig,
    MetricValue, TTestResult, TruncatedEntropyConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::samples::{load_samples, SampleRecord, REFERENCE_LABEL};
use crate::seeds::sha256_hex;

pub const VS_NGRAM: &str = "vs_ngram";
pub const VS_EMBED: &str = "vs_embed";
pub const TRUNCATED_ENTROPY: &str = "truncated_entropy";
pub const PRECISION: &str = "precision";
pub const RECALL: &str = "recall";
pub const MAUVE_LITE: &str = "mauve_lite";
pub const PER_PROMPT_METRICS: [&str; 3] = [VS_NGRAM, VS_EMBED, TRUNCATED_ENTROPY];

/// Where sample embeddings come from.
#[derive(Debug, Clone)]
pub enum Embeddings {
    /// Hashed n-gram projection computed on the fly.
    Projection(ProjectionEmbedder),
    /// Precomputed rows keyed by sample id.
    Table(HashMap<String, Vec<f64>>),
    /// Skip embedding-based metrics.
    Disabled,
}

impl Embeddings {
    pub fn from_files(paths: &[PathBuf]) -> Result<Self> {
        let mut table = HashMap::new();
        for p in paths {
            let e = read_embeddings(p)?;
            for (i, id) in e.ids().iter().enumerate() {
                table.insert(id.clone(), e.row(i).to_vec());
            }
        }
        Ok(Self::Table(table))
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Self::Projection(p) => json!({"kind": "projection", "dim": p.dim, "seed": p.seed, "orders": p.orders}),
            Self::Table(t) => json!({"kind": "file", "rows": t.len()}),
            Self::Disabled => json!({"kind": "disabled"}),
        }
    }

    fn matrix(&self, samples: &[&SampleRecord], include_incipit: bool) -> Result<Option<EmbeddingMatrix>> {
        let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
        match self {
            Self::Disabled => Ok(None),
            Self::Projection(p) => {
                let texts: Vec<String> = samples.iter().map(|s| s.evaluated_text(include_incipit)).collect();
                Ok(Some(p.embed(&ids, &texts)?))
            }
            Self::Table(t) => {
                let Some(rows) = ids.iter().map(|id| t.get(id).cloned()).collect::<Option<Vec<_>>>() else {
                    return Ok(None);
                };
                let m = EmbeddingMatrix::from_rows(&rows)?;
                Ok(Some(EmbeddingMatrix::new(m.points().clone(), ids)?))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub reference: String,
    pub include_incipit: bool,
    pub ngram_orders: Vec<usize>,
    pub pr_k: usize,
    pub mauve: MauveConfig,
    pub entropy: TruncatedEntropyConfig,
    /// `(a, b)` pairs tested for `mean(a) > mean(b)` on every per-prompt
    /// metric. Empty means `B` over `A` when both exist.
    pub comparisons: Vec<(String, String)>,
    pub embeddings: Embeddings,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            reference: REFERENCE_LABEL.into(),
            include_incipit: true,
            ngram_orders: DEFAULT_NGRAM_ORDERS.to_vec(),
            pr_k: 3,
            mauve: MauveConfig::default(),
            entropy: TruncatedEntropyConfig::default(),
            comparisons: Vec::new(),
            embeddings: Embeddings::Projection(ProjectionEmbedder::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Prompt,
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub scope: Scope,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<String>,
    pub value: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl MetricRecord {
    fn from_value(metric: &str, scope: Scope, label: &str, prompt_id: Option<&str>, v: MetricValue) -> Self {
        Self {
            metric: metric.into(),
            scope,
            label: label.into(),
            prompt_id: prompt_id.map(Into::into),
            value: v.value,
            n_samples: v.n_samples,
            degenerate: v.degenerate,
            params: v.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRecord {
    pub metric: String,
    /// Alternative hypothesis: `mean(a) > mean(b)`.
    pub a: String,
    pub b: String,
    pub n_prompts: usize,
    #[serde(flatten)]
    pub result: TTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hashes: BTreeMap<String, String>,
    pub inputs: Vec<InputFile>,
    pub settings: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub reference: String,
    /// Labels in first-seen order.
    pub labels: Vec<String>,
    /// Prompt ids in first-seen order.
    pub prompts: Vec<String>,
    pub per_prompt: Vec<MetricRecord>,
    pub pooled: Vec<MetricRecord>,
    pub ttests: Vec<TTestRecord>,
    pub notices: Vec<String>,
    pub provenance: Provenance,
}

impl RunReport {
    /// Per-prompt values of one metric for one label, keyed by prompt id.
    pub fn series(&self, metric: &str, label: &str) -> BTreeMap<String, f64> {
        self.per_prompt
            .iter()
            .filter(|r| r.metric == metric && r.label == label)
            .filter_map(|r| r.prompt_id.clone().map(|p| (p, r.value)))
            .collect()
    }

    pub fn pooled_value(&self, metric: &str, label: &str) -> Option<f64> {
        self.pooled
            .iter()
            .find(|r| r.metric == metric && r.label == label)
            .map(|r| r.value)
    }

    pub fn ttest(&self, metric: &str, a: &str, b: &str) -> Option<&TTestRecord> {
        self.ttests.iter().find(|t| t.metric == metric && t.a == a && t.b == b)
    }
}

/// Paired test over the prompts both labels were scored on, in prompt-id
/// order.
pub fn compare(report: &RunReport, metric: &str, a: &str, b: &str) -> Result<TTestRecord> {
    let sa = report.series(metric, a);
    let sb = report.series(metric, b);
    let (xa, xb): (Vec<f64>, Vec<f64>) = sa
        .iter()
        .filter_map(|(p, &va)| sb.get(p).map(|&vb| (va, vb)))
        .unzip();
    let result = paired_ttest_one_tailed(&xa, &xb)?;
    Ok(TTestRecord {
        metric: metric.into(),
        a: a.into(),
        b: b.into(),
        n_prompts: xa.len(),
        result,
    })
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for i in items {
        if !out.iter().any(|o| o == i) {
            out.push(i.to_string());
        }
    }
    out
}

fn check_hashes(samples: &[SampleRecord]) -> Result<BTreeMap<String, String>> {
    let mut hashes: BTreeMap<String, String> = BTreeMap::new();
    for s in samples {
        match hashes.get(&s.label) {
            None => {
                hashes.insert(s.label.clone(), s.config_hash.clone());
            }
            Some(h) if *h != s.config_hash => {
                return Err(HarnessError::MixedConfig {
                    label: s.label.clone(),
                    first: h.clone(),
                    other: s.config_hash.clone(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(hashes)
}

struct Unit<'a> {
    label: &'a str,
    prompt: &'a str,
    samples: Vec<&'a SampleRecord>,
}

fn prompt_metrics(unit: &Unit<'_>, cfg: &EvalConfig) -> Result<(Vec<MetricRecord>, Vec<String>)> {
    let mut out = Vec::new();
    let mut notices = Vec::new();
    let (label, prompt) = (unit.label, Some(unit.prompt));
    let profiles: Vec<_> = unit
        .samples
        .iter()
        .map(|s| ngram_profile(&tokenize(&s.evaluated_text(cfg.include_incipit)), &cfg.ngram_orders))
        .collect();
    let vs = vendi_score(&ngram_kernel(&profiles)?)?.with_param("orders", cfg.ngram_orders.clone());
    out.push(MetricRecord::from_value(VS_NGRAM, Scope::Prompt, label, prompt, vs));

    match cfg.embeddings.matrix(&unit.samples, cfg.include_incipit)? {
        None if !matches!(cfg.embeddings, Embeddings::Disabled) => notices.push(format!(
            "{label}/{}: embeddings missing, skipped {VS_EMBED} and {TRUNCATED_ENTROPY}",
            unit.prompt
        )),
        None => {}
        Some(e) => {
            let vs = vendi_score(&embedding_kernel(&e)?)?;
            out.push(MetricRecord::from_value(VS_EMBED, Scope::Prompt, label, prompt, vs));
            if e.len() >= 2 {
                let te = truncated_entropy(&e, cfg.entropy)?;
                out.push(MetricRecord::from_value(TRUNCATED_ENTROPY, Scope::Prompt, label, prompt, te));
            }
        }
    }
    Ok((out, notices))
}

fn pooled_metrics(
    label: &str,
    gen: &[&SampleRecord],
    reference: &[&SampleRecord],
    cfg: &EvalConfig,
) -> Result<(Vec<MetricRecord>, Vec<String>)> {
    let mut notices = Vec::new();
    let (Some(g), Some(r)) = (
        cfg.embeddings.matrix(gen, cfg.include_incipit)?,
        cfg.embeddings.matrix(reference, cfg.include_incipit)?,
    ) else {
        if !matches!(cfg.embeddings, Embeddings::Disabled) {
            notices.push(format!("{label}: embeddings missing, skipped pooled metrics"));
        }
        return Ok((Vec::new(), notices));
    };
    let mut out = Vec::new();
    let pr = improved_precision_recall(&g, &r, cfg.pr_k)?;
    for (name, v) in [(PRECISION, pr.precision), (RECALL, pr.recall)] {
        let mv = MetricValue::new(name, v, g.len()).with_param("k", cfg.pr_k).with_param("reference_size", r.len());
        out.push(MetricRecord::from_value(name, Scope::Pooled, label, None, mv));
    }
    let m = mauve_lite(&g, &r, &cfg.mauve)?;
    out.push(MetricRecord::from_value(MAUVE_LITE, Scope::Pooled, label, None, m));
    Ok((out, notices))
}

/// Per-prompt diversity for every label, pooled quality/coverage of every
/// non-reference label against the reference, and the configured paired
/// t-tests.
pub fn evaluate(samples: &[SampleRecord], cfg: &EvalConfig) -> Result<RunReport> {
    let hashes = check_hashes(samples)?;
    let labels = first_seen(samples.iter().map(|s| s.label.as_str()));
    let prompts = first_seen(samples.iter().map(|s| s.prompt_id.as_str()));
    let mut notices = Vec::new();

    let mut units = Vec::new();
    for l in &labels {
        for p in &prompts {
            let group: Vec<&SampleRecord> = samples.iter().filter(|s| &s.label == l && &s.prompt_id == p).collect();
            match group.len() {
                0 => {}
                1 => notices.push(format!("{l}/{p}: single sample, per-prompt metrics skipped")),
                _ => units.push(Unit {
                    label: l,
                    prompt: p,
                    samples: group,
                }),
            }
        }
    }
    let results: Vec<_> = units.par_iter().map(|u| prompt_metrics(u, cfg)).collect::<Result<_>>()?;
    let mut per_prompt = Vec::new();
    for (recs, n) in results {
        per_prompt.extend(recs);
        notices.extend(n);
    }

    let mut pooled = Vec::new();
    let reference: Vec<&SampleRecord> = samples.iter().filter(|s| s.label == cfg.reference).collect();
    if reference.is_empty() {
        notices.push(format!("no samples labelled {:?}; pooled metrics skipped", cfg.reference));
    } else {
        let others: Vec<&String> = labels.iter().filter(|l| **l != cfg.reference).collect();
        let results: Vec<_> = others
            .par_iter()
            .map(|l| {
                let gen: Vec<&SampleRecord> = samples.iter().filter(|s| &s.label == *l).collect();
                pooled_metrics(l, &gen, &reference, cfg)
            })
            .collect::<Result<_>>()?;
        for (recs, n) in results {
            pooled.extend(recs);
            notices.extend(n);
        }
    }

    let mut report = RunReport {
        reference: cfg.reference.clone(),
        labels,
        prompts,
        per_prompt,
        pooled,
        ttests: Vec::new(),
        notices,
        provenance: Provenance {
            config_hashes: hashes,
            inputs: Vec::new(),
            settings: json!({
                "include_incipit": cfg.include_incipit,
                "ngram_orders": cfg.ngram_orders,
                "pr_k": cfg.pr_k,
                "mauve_scaling": cfg.mauve.scaling,
                "mauve_grid_points": cfg.mauve.grid_points,
                "mauve_seed": cfg.mauve.seed,
                "embeddings": cfg.embeddings.describe(),
            }),
        },
    };

    let comparisons = if cfg.comparisons.is_empty() {
        let has = |l: &str| report.labels.iter().any(|x| x == l);
        if has("A") && has("B") {
            vec![("B".to_string(), "A".to_string())]
        } else {
            Vec::new()
        }
    } else {
        cfg.comparisons.clone()
    };
    for (a, b) in &comparisons {
        for m in PER_PROMPT_METRICS {
            match compare(&report, m, a, b) {
                Ok(t) => report.ttests.push(t),
                Err(e) => report.notices.push(format!("t-test {m} {a} > {b} skipped: {e}")),
            }
        }
    }
    Ok(report)
}

/// Loads sample files, evaluates them and records the input hashes.
pub fn evaluate_files(paths: &[PathBuf], cfg: &EvalConfig) -> Result<RunReport> {
    let mut samples = Vec::new();
    let mut inputs = Vec::new();
    for p in paths {
        samples.extend(load_samples(p)?);
        inputs.push(input_file(p)?);
    }
    let mut report = evaluate(&samples, cfg)?;
    report.provenance.inputs = inputs;
    Ok(report)
}

pub fn input_file(p: &Path) -> Result<InputFile> {
    Ok(InputFile {
        path: p.display().to_string(),
        sha256: sha256_hex(&std::fs::read(p)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::Source;

    fn sample(label: &str, prompt: &str, i: usize, text: &str) -> SampleRecord {
        SampleRecord {
            id: format!("{prompt}/{label}/{i}"),
            prompt_id: prompt.into(),
            source: if label == REFERENCE_LABEL { Source::Reference } else { Source::Generated },
            label: label.into(),
            incipit: String::new(),
            text: text.into(),
            config_hash: format!("h-{label}"),
            seed: i as u64,
            stop_reason: None,
        }
    }

    #[test]
    fn mixed_hashes_rejected() {
        let mut s = vec![sample("A", "p", 0, "x y"), sample("A", "p", 1, "y z")];
        s[1].config_hash = "other".into();
        assert!(matches!(evaluate(&s, &EvalConfig::default()), Err(HarnessError::MixedConfig { .. })));
    }

    #[test]
    fn one_row_per_prompt_label_metric() {
        let mut s = Vec::new();
        for p in ["p1", "p2"] {
            for l in ["A", "B"] {
                for i in 0..6 {
                    s.push(sample(l, p, i, &format!("word{i} {l} shared text {p}")));
                }
            }
        }
        let r = evaluate(&s, &EvalConfig::default()).unwrap();
        assert_eq!(r.per_prompt.len(), 2 * 2 * 3);
        assert_eq!(r.ttests.len(), 3);
        assert!(r.notices.iter().any(|n| n.contains("pooled metrics skipped")));
    }

    #[test]
    fn missing_embeddings_skip_only_embedding_metrics() {
        let s: Vec<_> = (0..4).map(|i| sample("A", "p", i, &format!("t{i} u"))).collect();
        let cfg = EvalConfig {
            embeddings: Embeddings::Table(HashMap::new()),
            ..Default::default()
        };
        let r = evaluate(&s, &cfg).unwrap();
        assert_eq!(r.per_prompt.len(), 1);
        assert_eq!(r.per_prompt[0].metric, VS_NGRAM);
        assert!(!r.notices.is_empty());
    }
}
