//! Corpus-level aggregation and report artifacts.

mod plot;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspects::DivergenceFinding;
use crate::corpus::PaperRecord;
use crate::inference::{top_label, LabelDistribution, STAR_LABELS};
use crate::util::{sha256_hex, write_atomic};

pub use plot::bar_chart_svg;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Stated in every report because the bucket rule is an assumption.
pub const STAR_BUCKET_RULE: &str =
    "each document is counted once, under the top label (argmax) of its 5-star distribution";
pub const CATEGORY_BUCKET_RULE: &str =
    "each paper is counted once, under its primary (first-listed) arXiv category";
pub const ROUNDING_RULE: &str = "Percentages are rounded half-up to one decimal";

pub const REPORT_FILE: &str = "report.json";
pub const TABLES_FILE: &str = "tables.md";
pub const STAR_PLOT_FILE: &str = "star_distribution.svg";
pub const CATEGORY_PLOT_FILE: &str = "category_distribution.svg";
pub const HEATMAPS_FILE: &str = "heatmaps.html";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot aggregate an empty {0}")]
    Empty(&'static str),
    #[error("document {doc_id}: top label {label:?} is not a star rating")]
    NotStars { doc_id: String, label: String },
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("plot {name}: {message}")]
    Plot { name: String, message: String },
}

/// `100 * count / total` rounded half-up to one decimal, computed on
/// integers so the rounding is exact.
pub fn percent_half_up(count: usize, total: usize) -> f64 {
    assert!(total > 0 && count <= total);
    let (count, total) = (count as u128, total as u128);
    let tenths = (2000 * count + total) / (2 * total);
    tenths as f64 / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDistributionReport {
    pub total_docs: usize,
    pub percent_by_star: BTreeMap<String, f64>,
    pub top_label_counts: BTreeMap<String, usize>,
    pub bucket_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistributionReport {
    pub total_docs: usize,
    pub percent_by_category: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, usize>,
    pub bucket_rule: String,
}

impl CategoryDistributionReport {
    /// Categories by count descending, then name.
    pub fn ranked(&self) -> Vec<(&str, usize, f64)> {
        let mut rows: Vec<_> = self
            .counts
            .iter()
            .map(|(c, &n)| (c.as_str(), n, self.percent_by_category[c]))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }
}

pub fn star_distribution(
    results: &[(String, LabelDistribution)],
) -> Result<StarDistributionReport, ReportError> {
    if results.is_empty() {
        return Err(ReportError::Empty("result list"));
    }
    let mut counts: BTreeMap<String, usize> = STAR_LABELS.iter().map(|l| (l.to_string(), 0)).collect();
    for (doc_id, dist) in results {
        let label = top_label(dist);
        match counts.get_mut(label) {
            Some(n) => *n += 1,
            None => {
                return Err(ReportError::NotStars {
                    doc_id: doc_id.clone(),
                    label: label.to_string(),
                })
            }
        }
    }
    let total = results.len();
    Ok(StarDistributionReport {
        total_docs: total,
        percent_by_star: counts
            .iter()
            .map(|(l, &n)| (l.clone(), percent_half_up(n, total)))
            .collect(),
        top_label_counts: counts,
        bucket_rule: STAR_BUCKET_RULE.to_string(),
    })
}

pub fn category_distribution(
    corpus: &[PaperRecord],
) -> Result<CategoryDistributionReport, ReportError> {
    if corpus.is_empty() {
        return Err(ReportError::Empty("corpus"));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for record in corpus {
        *counts.entry(record.primary_category().to_string()).or_default() += 1;
    }
    let total = corpus.len();
    Ok(CategoryDistributionReport {
        total_docs: total,
        percent_by_category: counts
            .iter()
            .map(|(c, &n)| (c.clone(), percent_half_up(n, total)))
            .collect(),
        counts,
        bucket_rule: CATEGORY_BUCKET_RULE.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceFinding>,
    pub divergent: usize,
    pub total: usize,
}

impl DivergenceTable {
    pub fn summary(&self) -> String {
        format!("{} / {}", self.divergent, self.total)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| doc_id | overall | overall polarity | aspect | aspect polarity | divergent |\n\
             |---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                r.doc_id,
                r.overall_star,
                r.overall_polarity,
                escape_cell(&r.aspect),
                r.aspect_polarity,
                if r.divergent { "**yes**" } else { "no" }
            );
        }
        let _ = writeln!(out, "\nDivergent: {}", self.summary());
        out
    }
}

pub fn divergence_table(findings: &[DivergenceFinding]) -> DivergenceTable {
    let mut rows = findings.to_vec();
    rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id).then_with(|| a.aspect.cmp(&b.aspect)));
    DivergenceTable {
        divergent: rows.iter().filter(|r| r.divergent).count(),
        total: rows.len(),
        rows,
    }
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Structured,
    Tabular,
    Plots,
    Heatmaps,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 4] = [
        ReportFormat::Structured,
        ReportFormat::Tabular,
        ReportFormat::Plots,
        ReportFormat::Heatmaps,
    ];
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" => Ok(Self::Structured),
            "tabular" => Ok(Self::Tabular),
            "plots" => Ok(Self::Plots),
            "heatmaps" => Ok(Self::Heatmaps),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// A rendered HTML heatmap fragment for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapEntry {
    pub doc_id: String,
    pub target_label: String,
    pub html: String,
}

/// Everything a report can contain. `config` is embedded verbatim in the
/// structured report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub stars: Option<StarDistributionReport>,
    pub categories: Option<CategoryDistributionReport>,
    pub divergence: Option<DivergenceTable>,
    #[serde(skip)]
    pub heatmaps: Vec<HeatmapEntry>,
    pub config: serde_json::Value,
}

#[derive(Serialize)]
struct StructuredReport<'a> {
    schema_version: u32,
    rounding_rule: &'a str,
    config: &'a serde_json::Value,
    stars: Option<&'a StarDistributionReport>,
    categories: Option<&'a CategoryDistributionReport>,
    divergence: Option<StructuredDivergence<'a>>,
    heatmap_documents: Vec<&'a str>,
}

#[derive(Serialize)]
struct StructuredDivergence<'a> {
    summary: String,
    #[serde(flatten)]
    table: &'a DivergenceTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generated_at: DateTime<Utc>,
    pub files: Vec<ManifestEntry>,
}

fn render_tables(bundle: &ReportBundle) -> String {
    let mut out = String::from("# Sentiment report\n");
    if let Some(stars) = &bundle.stars {
        let _ = write!(
            out,
            "\n## Overall star rating\n\nBucketing: {}. {}.\n\n| label | documents | percent |\n|---|---|---|\n",
            stars.bucket_rule, ROUNDING_RULE
        );
        for label in STAR_LABELS {
            let _ = writeln!(
                out,
                "| {label} | {} | {:.1} |",
                stars.top_label_counts[label], stars.percent_by_star[label]
            );
        }
        let _ = writeln!(out, "\nTotal documents: {}", stars.total_docs);
    }
    if let Some(cats) = &bundle.categories {
        let _ = write!(
            out,
            "\n## Primary category\n\nBucketing: {}. {}.\n\n| category | papers | percent |\n|---|---|---|\n",
            cats.bucket_rule, ROUNDING_RULE
        );
        for (c, n, p) in cats.ranked() {
            let _ = writeln!(out, "| {} | {n} | {p:.1} |", escape_cell(c));
        }
        let _ = writeln!(out, "\nTotal papers: {}", cats.total_docs);
    }
    if let Some(div) = &bundle.divergence {
        out.push_str("\n## Overall vs aspect polarity\n\n");
        out.push_str(&div.to_markdown());
    }
    out
}

fn render_heatmap_page(entries: &[HeatmapEntry]) -> String {
    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Attribution heatmaps</title>\n</head>\n<body>\n\
         <p>Red spans raise the target label's score, blue spans lower it. Intensity is relative to the largest |phi| in each document.</p>\n",
    );
    for e in entries {
        let _ = write!(
            out,
            "<section>\n<h2>{} ({})</h2>\n{}\n</section>\n",
            html_escape(&e.doc_id),
            html_escape(&e.target_label),
            e.html
        );
    }
    out.push_str("</body>\n</html>\n");
    out
}

fn html_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn put(out_dir: &Path, name: &str, contents: &[u8], files: &mut Vec<ManifestEntry>) -> Result<(), ReportError> {
    let path = out_dir.join(name);
    write_atomic(&path, contents).map_err(|source| ReportError::Write { path, source })?;
    files.push(ManifestEntry {
        path: name.to_string(),
        bytes: contents.len(),
        sha256: sha256_hex(contents),
    });
    Ok(())
}

/// Writes the requested artifacts into `out_dir` plus a manifest. Content
/// files depend only on `bundle`; the manifest alone carries a timestamp.
pub fn emit_report(
    bundle: &ReportBundle,
    formats: &[ReportFormat],
    out_dir: &Path,
) -> Result<Manifest, ReportError> {
    let want = |f: ReportFormat| formats.contains(&f);
    let mut files = Vec::new();

    if want(ReportFormat::Structured) {
        let doc = StructuredReport {
            schema_version: REPORT_SCHEMA_VERSION,
            rounding_rule: ROUNDING_RULE,
            config: &bundle.config,
            stars: bundle.stars.as_ref(),
            categories: bundle.categories.as_ref(),
            divergence: bundle.divergence.as_ref().map(|table| StructuredDivergence {
                summary: table.summary(),
                table,
            }),
            heatmap_documents: bundle.heatmaps.iter().map(|h| h.doc_id.as_str()).collect(),
        };
        let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
        json.push('\n');
        put(out_dir, REPORT_FILE, json.as_bytes(), &mut files)?;
    }
    if want(ReportFormat::Tabular) {
        put(out_dir, TABLES_FILE, render_tables(bundle).as_bytes(), &mut files)?;
    }
    if want(ReportFormat::Plots) {
        if let Some(stars) = &bundle.stars {
            let bars: Vec<(String, f64)> = STAR_LABELS
                .iter()
                .map(|l| (l.to_string(), stars.percent_by_star[*l]))
                .collect();
            let svg = bar_chart_svg("Overall star rating (top label)", &bars).map_err(|message| {
                ReportError::Plot {
                    name: STAR_PLOT_FILE.into(),
                    message,
                }
            })?;
            put(out_dir, STAR_PLOT_FILE, svg.as_bytes(), &mut files)?;
        }
        if let Some(cats) = &bundle.categories {
            let bars: Vec<(String, f64)> = cats
                .ranked()
                .into_iter()
                .map(|(c, _, p)| (c.to_string(), p))
                .collect();
            let svg = bar_chart_svg("Primary arXiv category", &bars).map_err(|message| ReportError::Plot {
                name: CATEGORY_PLOT_FILE.into(),
                message,
            })?;
            put(out_dir, CATEGORY_PLOT_FILE, svg.as_bytes(), &mut files)?;
        }
    }
    if want(ReportFormat::Heatmaps) {
        put(out_dir, HEATMAPS_FILE, render_heatmap_page(&bundle.heatmaps).as_bytes(), &mut files)?;
    }

    let manifest = Manifest {
        schema_version: REPORT_SCHEMA_VERSION,
        generated_at: Utc::now(),
        files,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = out_dir.join(MANIFEST_FILE);
    write_atomic(&path, json.as_bytes()).map_err(|source| ReportError::Write { path, source })?;
    Ok(manifest)
}
