use super::{mask_apply, Coalition, ExplainError, FeatureSegmentation, ValueFunction, DEFAULT_PLACEHOLDER};
use crate::inference::{classify_batch, Classifier, ClassifierInput, InferenceError};

/// `v(S)`: the classifier's score for `target` on the text with every span
/// outside `S` masked.
pub struct TextGame<'a> {
    model: &'a dyn Classifier,
    text: &'a str,
    segmentation: &'a FeatureSegmentation,
    target: String,
    aspect: Option<String>,
    placeholder: String,
}

impl<'a> TextGame<'a> {
    pub fn new(
        model: &'a dyn Classifier,
        text: &'a str,
        segmentation: &'a FeatureSegmentation,
        target: &str,
    ) -> Result<Self, ExplainError> {
        if model.spec().label_index(target).is_none() {
            return Err(InferenceError::UnknownLabel(target.to_string()).into());
        }
        segmentation.check(text)?;
        Ok(Self {
            model,
            text,
            segmentation,
            target: target.to_string(),
            aspect: None,
            placeholder: model.mask_token().unwrap_or(DEFAULT_PLACEHOLDER).to_string(),
        })
    }

    /// Explain an aspect model's score for the `(text, aspect)` pair.
    pub fn with_aspect(mut self, aspect: &str) -> Self {
        self.aspect = Some(aspect.to_string());
        self
    }

    pub fn with_placeholder(mut self, placeholder: &str) -> Self {
        self.placeholder = placeholder.to_string();
        self
    }

    pub fn placeholder(&self) -> &str {
        &self.placeholder
    }

    pub fn masked_text(&self, active: &Coalition) -> String {
        mask_apply(self.text, self.segmentation, active, &self.placeholder)
    }
}

impl ValueFunction for TextGame<'_> {
    fn players(&self) -> usize {
        self.segmentation.len()
    }

    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>, ExplainError> {
        let inputs: Vec<ClassifierInput> = coalitions
            .iter()
            .map(|c| ClassifierInput {
                text: self.masked_text(c),
                aspect: self.aspect.clone(),
            })
            .collect();
        let dists = classify_batch(&inputs, self.model)?;
        Ok(dists
            .iter()
            .map(|d| d.score(&self.target).expect("label validated at construction"))
            .collect())
    }
}
