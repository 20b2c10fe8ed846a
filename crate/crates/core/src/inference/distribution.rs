use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{InferenceError, ModelSpec};
use crate::util::sha256_hex;

const SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub score: f64,
}

/// Classifier output: every declared label once, sorted by score descending.
/// Exact ties keep the declared label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub entries: Vec<LabelScore>,
    /// The model's declared label order.
    pub label_set: Vec<String>,
    pub model_id: String,
    pub target_text_hash: String,
    /// Set when the input exceeded the model window and was cut.
    #[serde(default)]
    pub truncated: bool,
}

impl LabelDistribution {
    /// Builds a distribution from probabilities given in declared label order.
    pub fn from_scores(
        spec: &ModelSpec,
        probs: &[f64],
        text: &str,
        truncated: bool,
    ) -> Result<Self, InferenceError> {
        if probs.len() != spec.label_set.len() {
            return Err(InferenceError::InvalidOutput(format!(
                "{} scores for {} labels",
                probs.len(),
                spec.label_set.len()
            )));
        }
        let entries = spec
            .label_set
            .iter()
            .zip(probs)
            .map(|(label, &score)| LabelScore {
                label: label.clone(),
                score,
            })
            .collect();
        let mut dist = Self {
            entries,
            label_set: spec.label_set.clone(),
            model_id: spec.model_id.clone(),
            target_text_hash: sha256_hex(text.as_bytes()),
            truncated,
        };
        dist.sort_entries();
        dist.validate()?;
        Ok(dist)
    }

    /// Builds a distribution from `(label, score)` pairs in any order.
    pub fn from_pairs(
        label_set: &[&str],
        pairs: &[(&str, f64)],
        model_id: &str,
    ) -> Result<Self, InferenceError> {
        let mut dist = Self {
            entries: pairs
                .iter()
                .map(|(label, score)| LabelScore {
                    label: label.to_string(),
                    score: *score,
                })
                .collect(),
            label_set: label_set.iter().map(|s| s.to_string()).collect(),
            model_id: model_id.to_string(),
            target_text_hash: String::new(),
            truncated: false,
        };
        dist.sort_entries();
        dist.validate()?;
        Ok(dist)
    }

    fn declared_index(&self, label: &str) -> usize {
        self.label_set
            .iter()
            .position(|l| l == label)
            .unwrap_or(usize::MAX)
    }

    fn rank_cmp(&self, a: &LabelScore, b: &LabelScore) -> Ordering {
        b.score
            .total_cmp(&a.score)
            .then_with(|| self.declared_index(&a.label).cmp(&self.declared_index(&b.label)))
    }

    fn sort_entries(&mut self) {
        let mut entries = std::mem::take(&mut self.entries);
        entries.sort_by(|a, b| self.rank_cmp(a, b));
        self.entries = entries;
    }

    pub fn score(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.score)
    }

    /// Checks completeness, ranges, normalization and ordering.
    pub fn validate(&self) -> Result<(), InferenceError> {
        let invalid = |m: String| Err(InferenceError::InvalidOutput(m));
        if self.entries.len() != self.label_set.len() {
            return invalid(format!(
                "{} entries for {} labels",
                self.entries.len(),
                self.label_set.len()
            ));
        }
        for label in &self.label_set {
            if self.entries.iter().filter(|e| &e.label == label).count() != 1 {
                return invalid(format!("label {label:?} must appear exactly once"));
            }
        }
        for e in &self.entries {
            if !(e.score.is_finite() && (0.0..=1.0).contains(&e.score)) {
                return invalid(format!("score {} for {:?} outside [0, 1]", e.score, e.label));
            }
        }
        let sum: f64 = self.entries.iter().map(|e| e.score).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return invalid(format!("scores sum to {sum}"));
        }
        if self
            .entries
            .windows(2)
            .any(|w| self.rank_cmp(&w[0], &w[1]) == Ordering::Greater)
        {
            return invalid("entries are not in rank order".into());
        }
        Ok(())
    }
}

impl fmt::Display for LabelDistribution {
    /// Scores rounded to four decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{} {:.4}", e.label, e.score))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// The highest-scoring label; exact ties go to the label declared first.
/// Storage order of the entries does not matter.
pub fn top_label(dist: &LabelDistribution) -> &str {
    dist.entries
        .iter()
        .min_by(|a, b| dist.rank_cmp(a, b))
        .map(|e| e.label.as_str())
        .unwrap_or_default()
}

/// Exact sum of the scores of the named labels (duplicates count once).
pub fn cumulative_probability(
    dist: &LabelDistribution,
    labels: &[&str],
) -> Result<f64, InferenceError> {
    let mut seen: Vec<&str> = Vec::with_capacity(labels.len());
    let mut total = 0.0;
    for &label in labels {
        if seen.contains(&label) {
            continue;
        }
        total += dist
            .score(label)
            .ok_or_else(|| InferenceError::UnknownLabel(label.to_string()))?;
        seen.push(label);
    }
    Ok(total)
}
