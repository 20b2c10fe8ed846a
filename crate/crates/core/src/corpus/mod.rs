//! Corpus construction: arXiv records, title-prefixed documents and
//! summary statistics.

mod arxiv;
mod segment;
mod store;

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Span;

pub use arxiv::{
    parse_feed, ArxivClient, DateWindow, FeedPage, FeedTransport, FetchError, Harvest,
    HarvestConfig, HttpTransport, ParseWarning, ReplayTransport, SearchQuery, TransportError,
    DEFAULT_BASE_URL,
};
pub use segment::segment_sentences;
pub use store::{load_corpus, save_corpus, StoreError};

/// One arXiv entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub arxiv_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    /// Category codes, primary category first.
    pub categories: Vec<String>,
    pub submitted: NaiveDate,
    pub fetched_at: DateTime<Utc>,
}

impl PaperRecord {
    pub fn primary_category(&self) -> &str {
        self.categories.first().map(String::as_str).unwrap_or_default()
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.arxiv_id.trim().is_empty() {
            return Err("arxiv_id is empty".into());
        }
        if self.categories.is_empty() {
            return Err("categories is empty".into());
        }
        if let Some(bad) = self.categories.iter().find(|c| !is_category_code(c)) {
            return Err(format!("invalid category code {bad:?}"));
        }
        Ok(())
    }
}

/// Accepts taxonomy codes such as `cs.CL`, `physics.soc-ph` and the
/// archive-only codes like `hep-th`.
pub fn is_category_code(code: &str) -> bool {
    fn part_ok(p: &str) -> bool {
        !p.is_empty()
            && p.chars().all(|c| c.is_ascii_alphabetic() || c == '-')
            && p.starts_with(|c: char| c.is_ascii_alphabetic())
    }
    match code.split_once('.') {
        Some((archive, sub)) => part_ok(archive) && part_ok(sub),
        None => part_ok(code),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentWarning {
    /// The record had no abstract; the document is the title sentence alone.
    EmptyAbstract,
}

/// The analysis unit: the title as a sentence followed by the abstract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractDocument {
    pub source_id: String,
    pub text: String,
    pub sentences: Vec<Span>,
    pub char_count: usize,
    pub sentence_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<DocumentWarning>,
}

impl AbstractDocument {
    pub fn sentence_text(&self, index: usize) -> Option<&str> {
        self.sentences.get(index).and_then(|s| s.slice(&self.text))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("record {0}: title is empty")]
    EmptyTitle(String),
    #[error("cannot summarize an empty corpus")]
    EmptyCorpus,
}

fn normalize_title(title: &str) -> String {
    let title = title.trim();
    if title.ends_with(['.', '!', '?']) {
        title.to_string()
    } else {
        format!("{title}.")
    }
}

/// Builds the title-prefixed document for a record.
///
/// A title without terminal punctuation gets a trailing period; the abstract
/// is appended verbatim after a single space.
pub fn build_document(record: &PaperRecord) -> Result<AbstractDocument, CorpusError> {
    if record.title.trim().is_empty() {
        return Err(CorpusError::EmptyTitle(record.arxiv_id.clone()));
    }
    let title = normalize_title(&record.title);
    let mut warnings = Vec::new();
    let text = if record.abstract_text.trim().is_empty() {
        warnings.push(DocumentWarning::EmptyAbstract);
        title
    } else {
        format!("{title} {}", record.abstract_text)
    };
    let sentences = segment_sentences(&text);
    Ok(AbstractDocument {
        source_id: record.arxiv_id.clone(),
        char_count: text.chars().count(),
        sentence_count: sentences.len(),
        sentences,
        text,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub document_count: usize,
    pub mean_sentences: f64,
    pub max_sentences: usize,
    /// Counts by primary category; empty when no records were supplied.
    pub category_counts: BTreeMap<String, usize>,
}

pub fn corpus_stats(
    docs: &[AbstractDocument],
    records: &[PaperRecord],
) -> Result<CorpusStats, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let total: usize = docs.iter().map(|d| d.sentence_count).sum();
    let max_sentences = docs.iter().map(|d| d.sentence_count).max().unwrap_or(0);
    let mut category_counts = BTreeMap::new();
    for record in records {
        *category_counts
            .entry(record.primary_category().to_string())
            .or_insert(0) += 1;
    }
    Ok(CorpusStats {
        document_count: docs.len(),
        mean_sentences: total as f64 / docs.len() as f64,
        max_sentences,
        category_counts,
    })
}
