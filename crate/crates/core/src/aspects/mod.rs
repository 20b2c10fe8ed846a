//! Aspect terms from positive attributions, per-aspect sentiment, and
//! overall-vs-aspect divergence.

mod stopwords;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AbstractDocument;
use crate::explain::{Attribution, ExplainError};
use crate::inference::{
    classify_batch, star_to_polarity, top_label, Classifier, ClassifierInput, InferenceError,
    LabelDistribution, LabelScore, Polarity, Task,
};
use crate::util::write_atomic;
use crate::Span;

pub use stopwords::is_stopword;

pub const DEFAULT_TAU_QUANTILE: f64 = 0.75;
pub const DEFAULT_MAX_CANDIDATES: usize = 10;
const MIN_TERM_CHARS: usize = 3;

#[derive(Debug, Error)]
pub enum AspectError {
    #[error("tau quantile must lie in [0, 1], got {0}")]
    InvalidQuantile(f64),
    #[error("attribution for {attribution} does not match document {document}")]
    WrongDocument { attribution: String, document: String },
    #[error(transparent)]
    Misaligned(#[from] ExplainError),
    #[error("no aspect terms to score")]
    NoCandidates,
    #[error("aspect {index} ({term:?}): {source}")]
    Classify {
        index: usize,
        term: String,
        source: InferenceError,
    },
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("aspect results file {path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectParams {
    pub tau_quantile: f64,
    pub max_candidates: usize,
}

impl Default for AspectParams {
    fn default() -> Self {
        Self {
            tau_quantile: DEFAULT_TAU_QUANTILE,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

/// One place a term was found. `phi` is the coverage-weighted mean phi of the
/// attribution spans the occurrence touches and `weight` the summed fraction
/// of those spans it covers, so `phi * weight` is its salience contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermOccurrence {
    pub span: Span,
    pub phi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectCandidate {
    pub term: String,
    pub occurrences: Vec<TermOccurrence>,
    pub salience: f64,
    /// 1-based.
    pub rank: usize,
}

impl AspectCandidate {
    pub fn first_position(&self) -> usize {
        self.occurrences.iter().map(|o| o.span.start).min().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectSentiment {
    pub doc_id: String,
    pub term: String,
    pub distribution: LabelDistribution,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceFinding {
    pub doc_id: String,
    pub overall_star: String,
    pub overall_polarity: Polarity,
    pub aspect: String,
    pub aspect_polarity: Polarity,
    pub divergent: bool,
}

/// Lowercases, drops a possessive "'s" and a plural "s". Words of three
/// letters or fewer and endings in "ss", "us" or "is" keep their "s".
pub fn normalize_word(word: &str) -> String {
    let mut w = word.to_lowercase();
    for possessive in ["'s", "\u{2019}s"] {
        if let Some(stripped) = w.strip_suffix(possessive) {
            w = stripped.to_string();
        }
    }
    while w.ends_with(['\'', '\u{2019}']) {
        w.pop();
    }
    if w.chars().count() > 3
        && w.ends_with('s')
        && !(w.ends_with("ss") || w.ends_with("us") || w.ends_with("is"))
    {
        w.pop();
    }
    w
}

#[derive(Debug, Clone, Copy)]
struct Token {
    start: usize,
    end: usize,
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Alphanumeric runs, with hyphens and apostrophes allowed between
/// alphanumerics.
fn tokens(text: &str, offset: usize) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric()
                || (is_joiner(c) && chars.get(j + 1).is_some_and(|n| n.1.is_alphanumeric()))
            {
                j += 1;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |c| c.0);
        out.push(Token {
            start: offset + start,
            end: offset + end,
        });
        i = j;
    }
    out
}

fn content_word(raw: &str) -> Option<String> {
    let norm = normalize_word(raw);
    let ok = norm.chars().count() >= MIN_TERM_CHARS
        && norm.chars().any(char::is_alphabetic)
        && !is_stopword(&raw.to_lowercase())
        && !is_stopword(&norm);
    ok.then_some(norm)
}

/// Normalized content words of `text`, in order. Extracted terms are
/// contiguous runs of this sequence.
pub fn normalized_terms(text: &str) -> Vec<String> {
    tokens(text, 0)
        .iter()
        .filter_map(|t| content_word(&text[t.start..t.end]))
        .collect()
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

struct Accumulator {
    term: String,
    occurrences: Vec<TermOccurrence>,
    salience: f64,
}

/// Ranked aspect candidates for `doc`, drawn from the spans of `attribution`
/// whose phi reaches the `tau_quantile` of the positive phi values.
pub fn extract_aspects(
    doc: &AbstractDocument,
    attribution: &Attribution,
    params: &AspectParams,
) -> Result<Vec<AspectCandidate>, AspectError> {
    if !(0.0..=1.0).contains(&params.tau_quantile) {
        return Err(AspectError::InvalidQuantile(params.tau_quantile));
    }
    if attribution.doc_id != doc.source_id {
        return Err(AspectError::WrongDocument {
            attribution: attribution.doc_id.clone(),
            document: doc.source_id.clone(),
        });
    }
    attribution.check_alignment(&doc.text)?;

    let mut positive: Vec<f64> = attribution
        .spans
        .iter()
        .map(|s| s.phi)
        .filter(|&p| p > 0.0)
        .collect();
    if positive.is_empty() || params.max_candidates == 0 {
        return Ok(Vec::new());
    }
    positive.sort_by(f64::total_cmp);
    let threshold = quantile(&positive, params.tau_quantile);
    let selected: Vec<bool> = attribution
        .spans
        .iter()
        .map(|s| s.phi > 0.0 && s.phi >= threshold)
        .collect();

    let mut terms: Vec<Accumulator> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut add = |term: String, occurrence: TermOccurrence, contribution: f64| {
        let slot = *index.entry(term.clone()).or_insert_with(|| {
            terms.push(Accumulator {
                term,
                occurrences: Vec::new(),
                salience: 0.0,
            });
            terms.len() - 1
        });
        terms[slot].occurrences.push(occurrence);
        terms[slot].salience += contribution;
    };

    let mut i = 0;
    while i < selected.len() {
        if !selected[i] {
            i += 1;
            continue;
        }
        // A run of adjacent selected spans; each token remembers its span.
        let mut run: Vec<(Token, usize)> = Vec::new();
        let mut span_tokens: HashMap<usize, usize> = HashMap::new();
        while i < selected.len() && selected[i] {
            let span = attribution.spans[i].span;
            let toks = tokens(&doc.text[span.start..span.end], span.start);
            span_tokens.insert(i, toks.len());
            run.extend(toks.into_iter().map(|t| (t, i)));
            i += 1;
        }
        let words: Vec<Option<String>> = run
            .iter()
            .map(|(t, _)| content_word(&doc.text[t.start..t.end]))
            .collect();
        let occurrence = |parts: &[(Token, usize)]| {
            let mut per_span: Vec<(usize, f64)> = Vec::new();
            for &(_, s) in parts {
                match per_span.iter_mut().find(|(k, _)| *k == s) {
                    Some(entry) => entry.1 += 1.0,
                    None => per_span.push((s, 1.0)),
                }
            }
            let mut weight = 0.0;
            let mut contribution = 0.0;
            for (s, covered) in per_span {
                let frac = covered / span_tokens[&s] as f64;
                weight += frac;
                contribution += attribution.spans[s].phi.max(0.0) * frac;
            }
            let span = Span::new(parts[0].0.start, parts[parts.len() - 1].0.end);
            (
                TermOccurrence {
                    span,
                    phi: contribution / weight,
                    weight,
                },
                contribution,
            )
        };
        for p in 0..run.len() {
            let Some(w) = &words[p] else { continue };
            let (occ, c) = occurrence(&run[p..=p]);
            add(w.clone(), occ, c);
            if let Some(Some(next)) = words.get(p + 1) {
                let gap = &doc.text[run[p].0.end..run[p + 1].0.start];
                if !gap.is_empty() && gap.chars().all(char::is_whitespace) {
                    let (occ, c) = occurrence(&run[p..=p + 1]);
                    add(format!("{w} {next}"), occ, c);
                }
            }
        }
    }

    let mut candidates: Vec<AspectCandidate> = terms
        .into_iter()
        .map(|a| AspectCandidate {
            term: a.term,
            occurrences: a.occurrences,
            salience: a.salience,
            rank: 0,
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.salience
            .total_cmp(&a.salience)
            .then_with(|| a.first_position().cmp(&b.first_position()))
            .then_with(|| a.term.cmp(&b.term))
    });
    candidates.truncate(params.max_candidates);
    for (r, c) in candidates.iter_mut().enumerate() {
        c.rank = r + 1;
    }
    Ok(candidates)
}

/// Aspect sentiment of `doc` toward each candidate, in order.
pub fn score_aspects(
    doc: &AbstractDocument,
    candidates: &[AspectCandidate],
    model: &dyn Classifier,
) -> Result<Vec<AspectSentiment>, AspectError> {
    let terms: Vec<&str> = candidates.iter().map(|c| c.term.as_str()).collect();
    score_terms(doc, &terms, model)
}

/// Like [`score_aspects`] for caller-supplied aspect terms.
pub fn score_terms(
    doc: &AbstractDocument,
    terms: &[&str],
    model: &dyn Classifier,
) -> Result<Vec<AspectSentiment>, AspectError> {
    if terms.is_empty() {
        return Err(AspectError::NoCandidates);
    }
    let spec = model.spec();
    if spec.task != Task::AspectSentiment {
        return Err(InferenceError::TaskMismatch {
            model_id: spec.model_id.clone(),
            expected: Task::AspectSentiment,
            actual: spec.task,
        }
        .into());
    }
    let inputs: Vec<ClassifierInput> = terms
        .iter()
        .map(|t| ClassifierInput::pair(doc.text.clone(), *t))
        .collect();
    let dists = classify_batch(&inputs, model).map_err(|e| match e {
        InferenceError::Batch { index, source } => AspectError::Classify {
            index,
            term: terms[index].to_string(),
            source: *source,
        },
        other => AspectError::Inference(other),
    })?;
    terms
        .iter()
        .zip(dists)
        .map(|(term, distribution)| {
            let polarity = Polarity::from_label(top_label(&distribution))?;
            Ok(AspectSentiment {
                doc_id: doc.source_id.clone(),
                term: term.to_string(),
                distribution,
                polarity,
            })
        })
        .collect()
}

/// One finding per aspect result, comparing its polarity with the polarity
/// of the overall top star label. Fails only if `overall` is not a star
/// distribution.
pub fn detect_divergence(
    overall: &LabelDistribution,
    aspect_results: &[AspectSentiment],
) -> Result<Vec<DivergenceFinding>, InferenceError> {
    let star = top_label(overall);
    let overall_polarity = star_to_polarity(star)?;
    Ok(aspect_results
        .iter()
        .map(|a| DivergenceFinding {
            doc_id: a.doc_id.clone(),
            overall_star: star.to_string(),
            overall_polarity,
            aspect: a.term.clone(),
            aspect_polarity: a.polarity,
            divergent: overall_polarity != a.polarity,
        })
        .collect())
}

/// Line of the aspect results file. `salience` is absent for caller-supplied
/// aspects. Scores are listed in declared label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectRecord {
    pub doc_id: String,
    pub term: String,
    pub salience: Option<f64>,
    pub polarity: Polarity,
    pub model_id: String,
    pub scores: Vec<LabelScore>,
}

impl AspectRecord {
    pub fn new(result: &AspectSentiment, salience: Option<f64>) -> Self {
        let d = &result.distribution;
        let scores = d
            .label_set
            .iter()
            .map(|label| LabelScore {
                label: label.clone(),
                score: d.score(label).unwrap_or(0.0),
            })
            .collect();
        Self {
            doc_id: result.doc_id.clone(),
            term: result.term.clone(),
            salience,
            polarity: result.polarity,
            model_id: d.model_id.clone(),
            scores,
        }
    }

    pub fn to_sentiment(&self) -> Result<AspectSentiment, InferenceError> {
        let labels: Vec<&str> = self.scores.iter().map(|s| s.label.as_str()).collect();
        let pairs: Vec<(&str, f64)> = self.scores.iter().map(|s| (s.label.as_str(), s.score)).collect();
        let distribution = LabelDistribution::from_pairs(&labels, &pairs, &self.model_id)?;
        Ok(AspectSentiment {
            doc_id: self.doc_id.clone(),
            term: self.term.clone(),
            polarity: Polarity::from_label(top_label(&distribution))?,
            distribution,
        })
    }
}

pub fn write_aspect_results(path: &Path, records: &[AspectRecord]) -> Result<(), AspectError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("aspect records serialize"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes()).map_err(|e| AspectError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_aspect_results(path: &Path) -> Result<Vec<AspectRecord>, AspectError> {
    let file_err = |message: String| AspectError::File {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| file_err(format!("line {}: {e}", i + 1))))
        .collect()
}
