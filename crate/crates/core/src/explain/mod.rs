//! Shapley additive explanations of classifier scores over text spans.

mod coalition;
mod heatmap;
mod hierarchical;
mod segmentation;
mod shapley;
mod text_game;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AbstractDocument;
use crate::inference::{Classifier, InferenceError};
use crate::util::write_atomic;
use crate::Span;

pub use coalition::Coalition;
pub use heatmap::{render_heatmap, HeatmapFormat};
pub use hierarchical::{shapley_hierarchical, HierarchicalValues, HierarchyParams, RefinedSentence};
pub use segmentation::{mask_apply, word_spans, FeatureSegmentation, Unit, DEFAULT_PLACEHOLDER};
pub use shapley::{
    sample_permutations, shapley_auto, shapley_exact, shapley_permutation, Estimator, GameFn,
    ShapleyValues, ValueFunction, DEFAULT_EXACT_LIMIT, DEFAULT_SAMPLES, EXACT_TOLERANCE,
};
pub use text_game::TextGame;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("{players} features exceed the exact limit of {limit}; use the permutation or hierarchical estimator")]
    TooManyPlayers { players: usize, limit: usize },
    #[error("sample count must be at least 1")]
    InvalidSamples,
    #[error("attribution does not line up with the text: {0}")]
    Misaligned(String),
    #[error("document has no sentences")]
    EmptyDocument,
    #[error("value function: {0}")]
    Game(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("attribution file {path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanValue {
    #[serde(flatten)]
    pub span: Span,
    pub phi: f64,
    pub stderr: f64,
}

/// Shapley explanation of one document's score for one target label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub doc_id: String,
    pub target_label: String,
    pub model_id: String,
    pub estimator: Estimator,
    pub seed: Option<u64>,
    pub sample_count: usize,
    /// Score with every span masked.
    pub base_value: f64,
    /// Score of the unmasked text.
    pub full_value: f64,
    pub spans: Vec<SpanValue>,
}

impl Attribution {
    pub fn efficiency_gap(&self) -> f64 {
        (self.base_value + self.spans.iter().map(|s| s.phi).sum::<f64>() - self.full_value).abs()
    }

    /// Spans must partition the non-whitespace content of `text`.
    pub fn check_alignment(&self, text: &str) -> Result<(), ExplainError> {
        let spans: Vec<Span> = self.spans.iter().map(|s| s.span).collect();
        segmentation::check_partition(text, &spans)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainParams {
    pub estimator: Estimator,
    /// Feature unit for the flat estimators; hierarchical always ends at words.
    pub unit: Unit,
    pub samples: usize,
    pub seed: u64,
    pub exact_limit: usize,
    pub top_k: usize,
    /// Overrides the classifier's mask token.
    pub placeholder: Option<String>,
}

impl Default for ExplainParams {
    fn default() -> Self {
        Self {
            estimator: Estimator::Hierarchical,
            unit: Unit::Word,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            exact_limit: DEFAULT_EXACT_LIMIT,
            top_k: 3,
            placeholder: None,
        }
    }
}

/// Word spans of `doc` and, for each sentence, the range of word indices
/// inside it.
pub fn sentence_word_groups(doc: &AbstractDocument) -> (Vec<Span>, Vec<std::ops::Range<usize>>) {
    let words = word_spans(&doc.text);
    let mut groups = Vec::with_capacity(doc.sentences.len());
    let mut w = 0;
    for sentence in &doc.sentences {
        let start = w;
        while w < words.len() && sentence.contains(&words[w]) {
            w += 1;
        }
        groups.push(start..w);
    }
    (words, groups)
}

/// Explains `model`'s score for `target` on `doc`. With `aspect` set, the
/// model is treated as a sentence-pair aspect classifier.
pub fn explain_document(
    model: &dyn Classifier,
    doc: &AbstractDocument,
    target: &str,
    aspect: Option<&str>,
    params: &ExplainParams,
) -> Result<Attribution, ExplainError> {
    if doc.sentences.is_empty() {
        return Err(ExplainError::EmptyDocument);
    }
    let segmentation = match (params.estimator, params.unit) {
        (Estimator::Hierarchical, _) | (_, Unit::Word) => FeatureSegmentation::words(&doc.text),
        (_, Unit::Sentence) => FeatureSegmentation {
            unit: Unit::Sentence,
            spans: doc.sentences.clone(),
        },
    };
    let mut game = TextGame::new(model, &doc.text, &segmentation, target)?;
    if let Some(a) = aspect {
        game = game.with_aspect(a);
    }
    if let Some(p) = &params.placeholder {
        game = game.with_placeholder(p);
    }

    let (values, spans): (ShapleyValues, Vec<SpanValue>) = match params.estimator {
        Estimator::Exact | Estimator::Permutation => {
            let v = if params.estimator == Estimator::Exact {
                shapley_exact(&game, params.exact_limit)?
            } else {
                shapley_permutation(&game, params.samples, params.seed)?
            };
            let spans = segmentation
                .spans
                .iter()
                .zip(v.phi.iter().zip(&v.stderr))
                .map(|(&span, (&phi, &stderr))| SpanValue { span, phi, stderr })
                .collect();
            (v, spans)
        }
        Estimator::Hierarchical => {
            let (words, groups) = sentence_word_groups(doc);
            let h = shapley_hierarchical(
                &game,
                &groups,
                &HierarchyParams {
                    top_k: params.top_k,
                    exact_limit: params.exact_limit,
                    samples: params.samples,
                    seed: params.seed,
                },
            )?;
            let mut spans = Vec::new();
            for (j, sentence) in doc.sentences.iter().enumerate() {
                match h.refined.iter().find(|r| r.sentence == j) {
                    Some(r) => spans.extend(r.words.clone().enumerate().map(|(k, w)| SpanValue {
                        span: words[w],
                        phi: r.values.phi[k],
                        stderr: r.values.stderr[k],
                    })),
                    None => spans.push(SpanValue {
                        span: *sentence,
                        phi: h.sentences.phi[j],
                        stderr: h.sentences.stderr[j],
                    }),
                }
            }
            (h.sentences, spans)
        }
    };

    Ok(Attribution {
        doc_id: doc.source_id.clone(),
        target_label: target.to_string(),
        model_id: model.spec().model_id.clone(),
        estimator: params.estimator,
        seed: values.seed,
        sample_count: values.sample_count,
        base_value: values.base_value,
        full_value: values.full_value,
        spans,
    })
}

/// Writes one JSON record per attribution, one per line.
pub fn write_attributions(path: &Path, attributions: &[Attribution]) -> Result<(), ExplainError> {
    let mut out = String::new();
    for a in attributions {
        out.push_str(&serde_json::to_string(a).expect("attributions serialize"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes()).map_err(|e| ExplainError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_attributions(path: &Path) -> Result<Vec<Attribution>, ExplainError> {
    let file_err = |message: String| ExplainError::File {
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
