//! Deterministic stand-in classifiers used for tests and offline runs.

use std::collections::HashMap;

use super::{softmax, Classifier, ClassifierInput, InferenceError, ModelSpec, Task};
use crate::corpus::segment_sentences;

/// Returns `softmax(logits)` for every input.
pub struct ConstantModel {
    spec: ModelSpec,
    probs: Vec<f64>,
}

impl ConstantModel {
    pub fn new(spec: ModelSpec, logits: Vec<f64>) -> Self {
        assert_eq!(logits.len(), spec.label_set.len(), "one logit per label");
        Self {
            probs: softmax(&logits),
            spec,
        }
    }
}

impl Classifier for ConstantModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        Ok(vec![self.probs.clone(); inputs.len()])
    }
}

/// Additive lexicon model: the logit of a label is its bias plus the sum of
/// that label's weight for every word in the input. Probabilities are the
/// softmax of the logits.
///
/// For aspect models only sentences mentioning the aspect are read (the whole
/// text when none does).
pub struct LexiconModel {
    spec: ModelSpec,
    bias: Vec<f64>,
    weights: HashMap<String, Vec<f64>>,
    mask_token: Option<String>,
}

/// Word valences in [-1, 1] shared by the built-in lexicons.
const VALENCE: &[(&str, f64)] = &[
    ("advantages", 0.8),
    ("accurate", 0.6),
    ("advancements", 0.7),
    ("benefit", 0.7),
    ("benefits", 0.7),
    ("effective", 0.7),
    ("embrace", 0.6),
    ("empower", 0.7),
    ("enhance", 0.6),
    ("excellent", 1.0),
    ("good", 0.6),
    ("great", 0.8),
    ("high", 0.3),
    ("improve", 0.6),
    ("improved", 0.6),
    ("innovative", 0.7),
    ("intelligent", 0.4),
    ("opportunities", 0.6),
    ("personalized", 0.4),
    ("potential", 0.5),
    ("promising", 0.8),
    ("reliable", 0.6),
    ("revolution", 0.6),
    ("significant", 0.5),
    ("success", 0.8),
    ("successful", 0.8),
    ("truthful", 0.3),
    ("useful", 0.7),
    ("abuse", -0.8),
    ("bad", -0.7),
    ("bias", -0.6),
    ("biases", -0.6),
    ("challenges", -0.5),
    ("concerns", -0.5),
    ("errors", -0.6),
    ("fail", -0.8),
    ("fails", -0.8),
    ("failure", -0.8),
    ("failures", -0.8),
    ("falls", -0.4),
    ("fall", -0.4),
    ("harmful", -0.9),
    ("lack", -0.6),
    ("limitations", -0.5),
    ("misinformation", -0.8),
    ("misuse", -0.8),
    ("negative", -0.6),
    ("poor", -0.8),
    ("risk", -0.6),
    ("risks", -0.6),
    ("short", -0.5),
    ("threat", -0.8),
    ("threats", -0.8),
    ("unreliable", -0.8),
];

impl LexiconModel {
    pub fn new<'a>(
        spec: ModelSpec,
        bias: Vec<f64>,
        weights: impl IntoIterator<Item = (&'a str, Vec<f64>)>,
    ) -> Self {
        let n = spec.label_set.len();
        assert_eq!(bias.len(), n, "one bias per label");
        let weights = weights
            .into_iter()
            .map(|(word, w)| {
                assert_eq!(w.len(), n, "one weight per label for {word:?}");
                (word.to_lowercase(), w)
            })
            .collect();
        Self {
            spec,
            bias,
            weights,
            mask_token: None,
        }
    }

    pub fn with_mask_token(mut self, token: &str) -> Self {
        self.mask_token = Some(token.to_string());
        self
    }

    /// Five-star model built from the shared valence table.
    pub fn builtin_overall() -> Self {
        let spec = ModelSpec::new("synthetic/lexicon-stars", Task::OverallSentiment, "1", 512);
        let weights = VALENCE.iter().map(|&(w, v)| {
            let per_star = (1..=5).map(|k| 0.6 * v * (k as f64 - 3.0)).collect();
            (w, per_star)
        });
        Self::new(spec, vec![-0.6, -0.2, 0.3, 0.4, -0.3], weights).with_mask_token("[MASK]")
    }

    /// Negative/Neutral/Positive aspect model built from the shared valence table.
    pub fn builtin_aspect() -> Self {
        let spec = ModelSpec::new("synthetic/lexicon-absa", Task::AspectSentiment, "1", 512);
        let weights = VALENCE.iter().map(|&(w, v)| (w, vec![-1.2 * v, 0.0, 1.2 * v]));
        Self::new(spec, vec![-0.2, 0.3, 0.0], weights).with_mask_token("[MASK]")
    }

    /// Lowercased alphanumeric words of `text`, mask tokens removed.
    pub fn words(&self, text: &str) -> Vec<String> {
        let cleaned = match &self.mask_token {
            Some(m) => text.replace(m.as_str(), " "),
            None => text.to_string(),
        };
        cleaned
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    fn read_region<'t>(&self, text: &'t str, aspect: Option<&str>) -> Vec<&'t str> {
        let Some(aspect) = aspect.map(str::to_lowercase) else {
            return vec![text];
        };
        let hits: Vec<&str> = segment_sentences(text)
            .iter()
            .filter_map(|s| s.slice(text))
            .filter(|s| s.to_lowercase().contains(&aspect))
            .collect();
        if hits.is_empty() {
            vec![text]
        } else {
            hits
        }
    }

    pub fn logits(&self, text: &str, aspect: Option<&str>) -> Vec<f64> {
        let mut logits = self.bias.clone();
        for region in self.read_region(text, aspect) {
            for word in self.words(region) {
                if let Some(w) = self.weights.get(&word) {
                    for (l, wi) in logits.iter_mut().zip(w) {
                        *l += wi;
                    }
                }
            }
        }
        logits
    }
}

impl Classifier for LexiconModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn mask_token(&self) -> Option<&str> {
        self.mask_token.as_deref()
    }

    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        Ok(inputs
            .iter()
            .map(|i| softmax(&self.logits(&i.text, i.aspect.as_deref())))
            .collect())
    }
}
