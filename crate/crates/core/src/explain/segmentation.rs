use serde::{Deserialize, Serialize};

use super::{Coalition, ExplainError};
use crate::corpus::segment_sentences;
use crate::span::spans_well_formed;
use crate::Span;

/// Placeholder used when the classifier exposes no mask token.
pub const DEFAULT_PLACEHOLDER: &str = "...";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Word,
    Sentence,
}

/// Maskable features of a text: ordered, non-overlapping spans that cover
/// every non-whitespace character exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSegmentation {
    pub unit: Unit,
    pub spans: Vec<Span>,
}

/// Maximal runs of non-whitespace characters.
pub fn word_spans(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                spans.push(Span::new(s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(Span::new(s, text.len()));
    }
    spans
}

impl FeatureSegmentation {
    pub fn words(text: &str) -> Self {
        Self {
            unit: Unit::Word,
            spans: word_spans(text),
        }
    }

    pub fn sentences(text: &str) -> Self {
        Self {
            unit: Unit::Sentence,
            spans: segment_sentences(text),
        }
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Verifies the spans partition the non-whitespace content of `text`.
    pub fn check(&self, text: &str) -> Result<(), ExplainError> {
        check_partition(text, &self.spans)
    }
}

pub(crate) fn check_partition(text: &str, spans: &[Span]) -> Result<(), ExplainError> {
    if !spans_well_formed(text, spans) {
        return Err(ExplainError::Misaligned(
            "spans must be ordered, non-empty, non-overlapping and on character boundaries".into(),
        ));
    }
    let mut cursor = 0;
    for span in spans.iter().chain(std::iter::once(&Span::new(text.len(), text.len()))) {
        if text[cursor..span.start].chars().any(|c| !c.is_whitespace()) {
            return Err(ExplainError::Misaligned(format!(
                "non-whitespace text at {cursor}..{} is not covered by any span",
                span.start
            )));
        }
        cursor = span.end;
    }
    Ok(())
}

/// Replaces every span outside `active` with `placeholder`; active spans and
/// all text between spans are kept verbatim.
pub fn mask_apply(
    text: &str,
    segmentation: &FeatureSegmentation,
    active: &Coalition,
    placeholder: &str,
) -> String {
    assert_eq!(
        active.players(),
        segmentation.len(),
        "coalition size must match the segmentation"
    );
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (i, span) in segmentation.spans.iter().enumerate() {
        out.push_str(&text[cursor..span.start]);
        if active.contains(i) {
            out.push_str(&text[span.start..span.end]);
        } else {
            out.push_str(placeholder);
        }
        cursor = span.end;
    }
    out.push_str(&text[cursor..]);
    out
}
