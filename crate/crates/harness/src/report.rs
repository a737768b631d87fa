use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::evaluate::{MetricRecord, RunReport, PER_PROMPT_METRICS};

/// Linear interpolation between closest ranks; `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty series");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub metric: String,
    pub label: String,
    pub n_prompts: usize,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

/// Median and quartiles of every per-prompt series, by metric then label.
pub fn summarize(report: &RunReport) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for metric in PER_PROMPT_METRICS {
        for label in &report.labels {
            let mut v: Vec<f64> = report.series(metric, label).into_values().collect();
            if v.is_empty() {
                continue;
            }
            v.sort_by(f64::total_cmp);
            rows.push(SummaryRow {
                metric: metric.into(),
                label: label.clone(),
                n_prompts: v.len(),
                mean: v.iter().sum::<f64>() / v.len() as f64,
                median: percentile(&v, 0.5),
                p25: percentile(&v, 0.25),
                p75: percentile(&v, 0.75),
            });
        }
    }
    rows
}

pub fn render_markdown(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Diversity report\n");
    let _ = writeln!(
        s,
        "Reference set: `{}`. Prompts: {}. Configurations: {}.\n",
        report.reference,
        report.prompts.len(),
        report.labels.join(", ")
    );

    let _ = writeln!(s, "## Per-prompt metrics\n");
    let _ = writeln!(s, "Median over prompts, with the 25th to 75th percentile range.\n");
    let _ = writeln!(s, "| metric | configuration | prompts | median | p25 | p75 | mean |");
    let _ = writeln!(s, "|---|---|---:|---:|---:|---:|---:|");
    for r in summarize(report) {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
            r.metric, r.label, r.n_prompts, r.median, r.p25, r.p75, r.mean
        );
    }

    if !report.pooled.is_empty() {
        let _ = writeln!(s, "\n## Pooled metrics against `{}`\n", report.reference);
        let _ = writeln!(s, "| metric | configuration | samples | value |");
        let _ = writeln!(s, "|---|---|---:|---:|");
        for r in &report.pooled {
            let flag = if r.degenerate { " (degenerate)" } else { "" };
            let _ = writeln!(s, "| {} | {} | {} | {:.4}{flag} |", r.metric, r.label, r.n_samples, r.value);
        }
    }

    if !report.ttests.is_empty() {
        let _ = writeln!(s, "\n## Paired one-tailed t-tests\n");
        let _ = writeln!(s, "| metric | hypothesis | prompts | mean diff | t | df | p |");
        let _ = writeln!(s, "|---|---|---:|---:|---:|---:|---:|");
        for t in &report.ttests {
            let _ = writeln!(
                s,
                "| {} | {} > {} | {} | {:.4} | {:.3} | {} | {:.4} |",
                t.metric, t.a, t.b, t.n_prompts, t.result.mean_difference, t.result.t, t.result.df, t.result.p_value
            );
        }
    }

    if !report.notices.is_empty() {
        let _ = writeln!(s, "\n## Notices\n");
        for n in &report.notices {
            let _ = writeln!(s, "- {n}");
        }
    }
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct PerPromptRow<'a> {
    metric: &'a str,
    label: &'a str,
    prompt_id: &'a str,
    value: f64,
    n_samples: usize,
    degenerate: bool,
}

pub fn per_prompt_csv(report: &RunReport) -> Result<String> {
    let rows: Vec<PerPromptRow> = report
        .per_prompt
        .iter()
        .map(|r| PerPromptRow {
            metric: &r.metric,
            label: &r.label,
            prompt_id: r.prompt_id.as_deref().unwrap_or(""),
            value: r.value,
            n_samples: r.n_samples,
            degenerate: r.degenerate,
        })
        .collect();
    to_csv(&rows)
}

pub fn summary_csv(report: &RunReport) -> Result<String> {
    to_csv(&summarize(report))
}

/// One JSON object per metric value, per-prompt first.
pub fn metric_lines(report: &RunReport) -> Result<String> {
    let mut s = String::new();
    for r in report.per_prompt.iter().chain(&report.pooled) {
        s.push_str(&serde_json::to_string::<MetricRecord>(r)?);
        s.push('\n');
    }
    Ok(s)
}

/// Writes `report.md`, `summary.csv`, `per_prompt.csv` and `metrics.ndjson`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.md"), render_markdown(report))?;
    fs::write(dir.join("summary.csv"), summary_csv(report)?)?;
    fs::write(dir.join("per_prompt.csv"), per_prompt_csv(report)?)?;
    fs::write(dir.join("metrics.ndjson"), metric_lines(report)?)?;
    Ok(())
}
