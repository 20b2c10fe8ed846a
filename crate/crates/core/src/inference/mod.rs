//! Classifier abstraction producing label distributions.
//!
//! Two tasks are supported: overall 1-5 star sentiment and aspect sentiment
//! over Negative/Neutral/Positive. Backends implement [`Classifier`]; the free
//! functions here validate inputs, apply the input window, and turn raw
//! probabilities into sorted [`LabelDistribution`]s.

mod cache;
mod distribution;
mod process;
mod registry;
mod synthetic;

use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheRecord, CachedClassifier, ScoreCache};
pub use distribution::{cumulative_probability, top_label, LabelDistribution, LabelScore};
pub use process::ProcessClassifier;
pub use registry::ModelRegistry;
pub use synthetic::{ConstantModel, LexiconModel};

pub const STAR_LABELS: [&str; 5] = ["1 star", "2 stars", "3 stars", "4 stars", "5 stars"];
pub const POLARITY_LABELS: [&str; 3] = ["Negative", "Neutral", "Positive"];

pub const DEFAULT_OVERALL_MODEL: &str = "nlptown/bert-base-multilingual-uncased-sentiment";
pub const DEFAULT_ASPECT_MODEL: &str = "yangheng/deberta-v3-base-absa-v1.1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("input text is empty")]
    EmptyInput,
    #[error("aspect term is empty")]
    EmptyAspect,
    #[error("model {model_id} performs {actual}, expected {expected}")]
    TaskMismatch {
        model_id: String,
        expected: Task,
        actual: Task,
    },
    #[error("model artifact {model_id:?} is not available")]
    ModelMissing { model_id: String },
    #[error("model {model_id:?}: requested revision {requested:?}, available {available:?}")]
    VersionMismatch {
        model_id: String,
        requested: String,
        available: String,
    },
    #[error("label {0:?} is not in the model's label set")]
    UnknownLabel(String),
    #[error("model returned an invalid distribution: {0}")]
    InvalidOutput(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("batch item {index}: {source}")]
    Batch {
        index: usize,
        source: Box<InferenceError>,
    },
}

impl InferenceError {
    /// Strips batch wrapping.
    pub fn root(&self) -> &InferenceError {
        match self {
            InferenceError::Batch { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures to obtain a model at all.
    pub fn is_load_error(&self) -> bool {
        matches!(
            self.root(),
            InferenceError::ModelMissing { .. } | InferenceError::VersionMismatch { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    OverallSentiment,
    AspectSentiment,
}

impl Task {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Task::OverallSentiment => &STAR_LABELS,
            Task::AspectSentiment => &POLARITY_LABELS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::OverallSentiment => "overall_sentiment",
            Task::AspectSentiment => "aspect_sentiment",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub task: Task,
    pub label_set: Vec<String>,
    /// Input window in whitespace-delimited units.
    pub max_input_units: usize,
    pub revision_pin: String,
}

impl ModelSpec {
    pub fn new(model_id: &str, task: Task, revision_pin: &str, max_input_units: usize) -> Self {
        Self {
            model_id: model_id.to_string(),
            task,
            label_set: task.labels().iter().map(|s| s.to_string()).collect(),
            max_input_units,
            revision_pin: revision_pin.to_string(),
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_set.iter().position(|l| l == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Polarity {
    pub fn label(self) -> &'static str {
        match self {
            Polarity::Negative => "Negative",
            Polarity::Neutral => "Neutral",
            Polarity::Positive => "Positive",
        }
    }

    pub fn from_label(label: &str) -> Result<Self, InferenceError> {
        match label {
            "Negative" => Ok(Polarity::Negative),
            "Neutral" => Ok(Polarity::Neutral),
            "Positive" => Ok(Polarity::Positive),
            other => Err(InferenceError::UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// {1,2} stars are Negative, 3 Neutral, {4,5} Positive.
pub fn star_to_polarity(star_label: &str) -> Result<Polarity, InferenceError> {
    match STAR_LABELS.iter().position(|l| *l == star_label) {
        Some(0 | 1) => Ok(Polarity::Negative),
        Some(2) => Ok(Polarity::Neutral),
        Some(_) => Ok(Polarity::Positive),
        None => Err(InferenceError::UnknownLabel(star_label.to_string())),
    }
}

/// One classifier request. `aspect` is set for sentence-pair (aspect) models.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassifierInput {
    pub text: String,
    pub aspect: Option<String>,
}

impl ClassifierInput {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            aspect: None,
        }
    }

    pub fn pair(text: impl Into<String>, aspect: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            aspect: Some(aspect.into()),
        }
    }
}

pub trait Classifier: Send + Sync {
    fn spec(&self) -> &ModelSpec;

    /// Placeholder the model understands as "no content here", if any.
    fn mask_token(&self) -> Option<&str> {
        None
    }

    /// Whether `predict` may be invoked from several threads at once.
    fn concurrent_safe(&self) -> bool {
        true
    }

    /// Returns one probability vector per input, in the declared label order.
    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError>;
}

/// Serializes `predict` calls of a classifier that is not safe to share.
pub struct Serialized<C> {
    inner: C,
    gate: Mutex<()>,
}

impl<C: Classifier> Serialized<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            gate: Mutex::new(()),
        }
    }
}

impl<C: Classifier> Classifier for Serialized<C> {
    fn spec(&self) -> &ModelSpec {
        self.inner.spec()
    }

    fn mask_token(&self) -> Option<&str> {
        self.inner.mask_token()
    }

    fn concurrent_safe(&self) -> bool {
        true
    }

    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        let _guard = self.gate.lock().unwrap_or_else(|p| p.into_inner());
        self.inner.predict(inputs)
    }
}

impl<C: Classifier + ?Sized> Classifier for std::sync::Arc<C> {
    fn spec(&self) -> &ModelSpec {
        (**self).spec()
    }
    fn mask_token(&self) -> Option<&str> {
        (**self).mask_token()
    }
    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        (**self).predict(inputs)
    }
}

/// Cuts `text` after `max_units` whitespace-delimited units.
pub fn truncate_units(text: &str, max_units: usize) -> (&str, bool) {
    let mut count = 0;
    let mut in_unit = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            in_unit = false;
        } else if !in_unit {
            in_unit = true;
            count += 1;
            if count > max_units {
                return (text[..i].trim_end(), true);
            }
        }
    }
    (text, false)
}

const BATCH_CHUNK: usize = 64;

fn check_input(spec: &ModelSpec, input: &ClassifierInput) -> Result<(), InferenceError> {
    if input.text.trim().is_empty() {
        return Err(InferenceError::EmptyInput);
    }
    match (spec.task, input.aspect.as_deref()) {
        (Task::AspectSentiment, None) => Err(InferenceError::EmptyAspect),
        (Task::AspectSentiment, Some(a)) if a.trim().is_empty() => Err(InferenceError::EmptyAspect),
        _ => Ok(()),
    }
}

/// Classifies every input with one model. Results are element-wise equal to
/// single calls; a failing item is reported with its index.
pub fn classify_batch(
    inputs: &[ClassifierInput],
    model: &dyn Classifier,
) -> Result<Vec<LabelDistribution>, InferenceError> {
    let spec = model.spec();
    let mut prepared = Vec::with_capacity(inputs.len());
    let mut flags = Vec::with_capacity(inputs.len());
    for (index, input) in inputs.iter().enumerate() {
        check_input(spec, input).map_err(|e| InferenceError::Batch {
            index,
            source: Box::new(e),
        })?;
        let (window, truncated) = truncate_units(&input.text, spec.max_input_units);
        prepared.push(ClassifierInput {
            text: window.to_string(),
            aspect: input.aspect.clone(),
        });
        flags.push(truncated);
    }

    let run_chunk = |(chunk_idx, chunk): (usize, &[ClassifierInput])| {
        let offset = chunk_idx * BATCH_CHUNK;
        let scores = model.predict(chunk).map_err(|e| InferenceError::Batch {
            index: offset,
            source: Box::new(e),
        })?;
        if scores.len() != chunk.len() {
            return Err(InferenceError::Batch {
                index: offset,
                source: Box::new(InferenceError::InvalidOutput(format!(
                    "{} results for {} inputs",
                    scores.len(),
                    chunk.len()
                ))),
            });
        }
        scores
            .iter()
            .enumerate()
            .map(|(i, probs)| {
                let index = offset + i;
                LabelDistribution::from_scores(spec, probs, &inputs[index].text, flags[index])
                    .map_err(|e| InferenceError::Batch {
                        index,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>, _>>()
    };

    let chunks: Vec<Vec<LabelDistribution>> = if model.concurrent_safe() {
        prepared
            .chunks(BATCH_CHUNK)
            .enumerate()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(run_chunk)
            .collect::<Result<_, _>>()?
    } else {
        prepared
            .chunks(BATCH_CHUNK)
            .enumerate()
            .map(run_chunk)
            .collect::<Result<_, _>>()?
    };
    Ok(chunks.into_iter().flatten().collect())
}

fn single(input: ClassifierInput, model: &dyn Classifier) -> Result<LabelDistribution, InferenceError> {
    classify_batch(std::slice::from_ref(&input), model)
        .map(|mut v| v.remove(0))
        .map_err(|e| e.root().clone())
}

fn expect_task(model: &dyn Classifier, expected: Task) -> Result<(), InferenceError> {
    let spec = model.spec();
    if spec.task != expected {
        return Err(InferenceError::TaskMismatch {
            model_id: spec.model_id.clone(),
            expected,
            actual: spec.task,
        });
    }
    Ok(())
}

/// Overall 1-5 star sentiment of a document.
pub fn classify_overall(text: &str, model: &dyn Classifier) -> Result<LabelDistribution, InferenceError> {
    expect_task(model, Task::OverallSentiment)?;
    single(ClassifierInput::text(text), model)
}

/// Sentiment of `text` toward `aspect`, encoded as a sentence pair.
pub fn classify_aspect(
    text: &str,
    aspect: &str,
    model: &dyn Classifier,
) -> Result<LabelDistribution, InferenceError> {
    expect_task(model, Task::AspectSentiment)?;
    single(ClassifierInput::pair(text, aspect), model)
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
