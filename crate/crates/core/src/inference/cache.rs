//! Content-addressed score cache.
//!
//! Keys digest `(model_id, revision_pin, task, text, aspect)`. Records live
//! in memory and, when a directory is configured, as one JSON file per key
//! (`<dir>/<key[..2]>/<key>.json`) written atomically. Readers run
//! concurrently; writes are serialized.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierInput, InferenceError, LabelScore, ModelSpec, Task};
use crate::util::{sha256_hex, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub model_id: String,
    pub revision_pin: String,
    pub task: Task,
    pub text_digest: String,
    pub aspect_digest: Option<String>,
    /// Scores in declared label order.
    pub entries: Vec<LabelScore>,
    pub created_at: DateTime<Utc>,
}

impl CacheRecord {
    fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }
}

#[derive(Default)]
pub struct ScoreCache {
    dir: Option<PathBuf>,
    memory: RwLock<HashMap<String, Vec<f64>>>,
    write_gate: Mutex<()>,
}

impl ScoreCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: Some(dir.to_path_buf()),
            ..Self::default()
        })
    }

    pub fn key(spec: &ModelSpec, input: &ClassifierInput) -> String {
        let aspect = input
            .aspect
            .as_deref()
            .map(|a| sha256_hex(a.as_bytes()))
            .unwrap_or_default();
        let material = [
            spec.model_id.as_str(),
            spec.revision_pin.as_str(),
            spec.task.as_str(),
            &sha256_hex(input.text.as_bytes()),
            &aspect,
        ]
        .join("\0");
        sha256_hex(material.as_bytes())
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(&key[..2]).join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        if let Some(hit) = self.memory.read().unwrap_or_else(|p| p.into_inner()).get(key) {
            return Some(hit.clone());
        }
        let path = self.path_for(key)?;
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheRecord>(&text) {
            Ok(record) if record.key == key => {
                let scores = record.scores();
                self.memory
                    .write()
                    .unwrap_or_else(|p| p.into_inner())
                    .insert(key.to_string(), scores.clone());
                Some(scores)
            }
            Ok(_) | Err(_) => {
                log::warn!("ignoring unreadable cache record {}", path.display());
                None
            }
        }
    }

    pub fn put(&self, spec: &ModelSpec, input: &ClassifierInput, scores: &[f64]) -> std::io::Result<()> {
        let key = Self::key(spec, input);
        let _gate = self.write_gate.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(path) = self.path_for(&key) {
            if !path.exists() {
                let record = CacheRecord {
                    key: key.clone(),
                    model_id: spec.model_id.clone(),
                    revision_pin: spec.revision_pin.clone(),
                    task: spec.task,
                    text_digest: sha256_hex(input.text.as_bytes()),
                    aspect_digest: input.aspect.as_deref().map(|a| sha256_hex(a.as_bytes())),
                    entries: spec
                        .label_set
                        .iter()
                        .zip(scores)
                        .map(|(label, &score)| LabelScore {
                            label: label.clone(),
                            score,
                        })
                        .collect(),
                    created_at: Utc::now(),
                };
                let json = serde_json::to_vec_pretty(&record).expect("cache records serialize");
                write_atomic(&path, &json)?;
            }
        }
        self.memory
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(key, scores.to_vec());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.memory.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Consults the cache before the wrapped classifier; only misses reach it.
pub struct CachedClassifier<C> {
    inner: C,
    cache: std::sync::Arc<ScoreCache>,
}

impl<C: Classifier> CachedClassifier<C> {
    pub fn new(inner: C, cache: std::sync::Arc<ScoreCache>) -> Self {
        Self { inner, cache }
    }
}

impl<C: Classifier> Classifier for CachedClassifier<C> {
    fn spec(&self) -> &ModelSpec {
        self.inner.spec()
    }

    fn mask_token(&self) -> Option<&str> {
        self.inner.mask_token()
    }

    fn concurrent_safe(&self) -> bool {
        self.inner.concurrent_safe()
    }

    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        let spec = self.inner.spec();
        let mut out: Vec<Option<Vec<f64>>> = inputs
            .iter()
            .map(|i| self.cache.get(&Self::key_of(spec, i)))
            .collect();
        let misses: Vec<usize> = (0..inputs.len()).filter(|&i| out[i].is_none()).collect();
        if !misses.is_empty() {
            let batch: Vec<ClassifierInput> = misses.iter().map(|&i| inputs[i].clone()).collect();
            let fresh = self.inner.predict(&batch)?;
            if fresh.len() != batch.len() {
                return Err(InferenceError::InvalidOutput(format!(
                    "{} results for {} inputs",
                    fresh.len(),
                    batch.len()
                )));
            }
            for (&i, scores) in misses.iter().zip(fresh) {
                self.cache
                    .put(spec, &inputs[i], &scores)
                    .map_err(|e| InferenceError::Backend(format!("cache write failed: {e}")))?;
                out[i] = Some(scores);
            }
        }
        Ok(out.into_iter().map(|s| s.expect("filled above")).collect())
    }
}

impl<C> CachedClassifier<C> {
    fn key_of(spec: &ModelSpec, input: &ClassifierInput) -> String {
        ScoreCache::key(spec, input)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    use super::*;
    use crate::inference::{classify_aspect, classify_batch, classify_overall, LexiconModel};

    struct Counting {
        inner: LexiconModel,
        calls: AtomicUsize,
    }

    impl Classifier for Counting {
        fn spec(&self) -> &ModelSpec {
            self.inner.spec()
        }
        fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
            self.calls.fetch_add(inputs.len(), Ordering::SeqCst);
            self.inner.predict(inputs)
        }
    }

    #[test]
    fn cached_path_is_bitwise_identical() {
        let dir = tempfile::tempdir().unwrap();
        let texts = [
            "ChatGPT fails in providing truthful answers.",
            "A promising, effective revolution in education.",
        ];
        let plain = LexiconModel::builtin_overall();
        let counting = Counting {
            inner: LexiconModel::builtin_overall(),
            calls: AtomicUsize::new(0),
        };
        let cached = CachedClassifier::new(counting, Arc::new(ScoreCache::open(dir.path()).unwrap()));
        for t in texts {
            let a = classify_overall(t, &plain).unwrap();
            let b = classify_overall(t, &cached).unwrap();
            let c = classify_overall(t, &cached).unwrap();
            assert_eq!(a, b);
            assert_eq!(b, c);
            for (x, y) in a.entries.iter().zip(&c.entries) {
                assert_eq!(x.score.to_bits(), y.score.to_bits());
            }
        }
        assert_eq!(cached.inner.calls.load(Ordering::SeqCst), 2);

        // A fresh cache over the same directory serves from disk.
        let reopened = CachedClassifier::new(
            Counting {
                inner: LexiconModel::builtin_overall(),
                calls: AtomicUsize::new(0),
            },
            Arc::new(ScoreCache::open(dir.path()).unwrap()),
        );
        for t in texts {
            let a = classify_overall(t, &plain).unwrap();
            let b = classify_overall(t, &reopened).unwrap();
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert_eq!(x.score.to_bits(), y.score.to_bits());
            }
        }
        assert_eq!(reopened.inner.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn key_separates_aspect_and_revision() {
        let spec = ModelSpec::new("m", Task::AspectSentiment, "1", 10);
        let spec2 = ModelSpec::new("m", Task::AspectSentiment, "2", 10);
        let a = ClassifierInput::pair("text", "x");
        let b = ClassifierInput::pair("text", "y");
        assert_ne!(ScoreCache::key(&spec, &a), ScoreCache::key(&spec, &b));
        assert_ne!(ScoreCache::key(&spec, &a), ScoreCache::key(&spec2, &a));
        assert_eq!(ScoreCache::key(&spec, &a), ScoreCache::key(&spec, &a.clone()));
    }

    #[test]
    fn concurrent_batches_share_cache() {
        let cache = Arc::new(ScoreCache::in_memory());
        let model = Arc::new(CachedClassifier::new(LexiconModel::builtin_aspect(), Arc::clone(&cache)));
        let inputs: Vec<_> = (0..50)
            .map(|i| ClassifierInput::pair(format!("item {} is poor or great", i % 10), "item"))
            .collect();
        let expected = classify_batch(&inputs, &LexiconModel::builtin_aspect()).unwrap();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| assert_eq!(classify_batch(&inputs, model.as_ref()).unwrap(), expected));
            }
        });
        assert_eq!(cache.len(), 10);
        assert!(classify_aspect("x is good", "x", model.as_ref()).is_ok());
    }
}
