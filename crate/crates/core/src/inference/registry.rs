use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Classifier, ConstantModel, InferenceError, LexiconModel, ModelSpec, Task};

/// Resolves `(model_id, revision)` pairs to loaded classifiers.
#[derive(Default, Clone)]
pub struct ModelRegistry {
    models: BTreeMap<String, Arc<dyn Classifier>>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry preloaded with the synthetic models:
    /// `synthetic/lexicon-stars`, `synthetic/lexicon-absa`,
    /// `synthetic/uniform-stars` and `synthetic/uniform-absa`, all at revision "1".
    pub fn with_builtins() -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(LexiconModel::builtin_overall()));
        reg.register(Arc::new(LexiconModel::builtin_aspect()));
        reg.register(Arc::new(ConstantModel::new(
            ModelSpec::new("synthetic/uniform-stars", Task::OverallSentiment, "1", 512),
            vec![0.0; 5],
        )));
        reg.register(Arc::new(ConstantModel::new(
            ModelSpec::new("synthetic/uniform-absa", Task::AspectSentiment, "1", 512),
            vec![0.0; 3],
        )));
        reg
    }

    pub fn register(&mut self, model: Arc<dyn Classifier>) {
        self.models.insert(model.spec().model_id.clone(), model);
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    pub fn resolve(&self, model_id: &str, revision: &str) -> Result<Arc<dyn Classifier>, InferenceError> {
        let model = self
            .models
            .get(model_id)
            .ok_or_else(|| InferenceError::ModelMissing {
                model_id: model_id.to_string(),
            })?;
        let available = &model.spec().revision_pin;
        if available != revision {
            return Err(InferenceError::VersionMismatch {
                model_id: model_id.to_string(),
                requested: revision.to_string(),
                available: available.clone(),
            });
        }
        Ok(Arc::clone(model))
    }
}
