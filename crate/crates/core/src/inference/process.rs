//! Adapter for classifiers hosted in an external process.
//!
//! Each `predict` call spawns the configured command, writes one JSON request
//! to its stdin and reads one JSON response from its stdout:
//!
//! ```text
//! request:  {"model_id": "...", "revision": "...", "task": "overall_sentiment",
//!            "labels": ["1 star", ...], "inputs": [{"text": "...", "aspect": null}]}
//! response: {"scores": [[0.1, 0.3, ...], ...]}         // declared label order
//!       or: {"error": {"kind": "missing" | "version_mismatch" | "backend",
//!                      "message": "...", "available": "..."}}
//! ```

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierInput, InferenceError, ModelSpec, Task};

pub struct ProcessClassifier {
    spec: ModelSpec,
    command: Vec<String>,
    mask_token: Option<String>,
}

#[derive(Serialize)]
struct Request<'a> {
    model_id: &'a str,
    revision: &'a str,
    task: Task,
    labels: &'a [String],
    inputs: Vec<RequestInput<'a>>,
}

#[derive(Serialize)]
struct RequestInput<'a> {
    text: &'a str,
    aspect: Option<&'a str>,
}

#[derive(Deserialize)]
struct Response {
    scores: Option<Vec<Vec<f64>>>,
    error: Option<ResponseError>,
}

#[derive(Deserialize)]
struct ResponseError {
    kind: String,
    message: String,
    #[serde(default)]
    available: Option<String>,
}

impl ProcessClassifier {
    pub fn new(spec: ModelSpec, command: Vec<String>) -> Self {
        assert!(!command.is_empty(), "command must name a program");
        Self {
            spec,
            command,
            mask_token: None,
        }
    }

    pub fn with_mask_token(mut self, token: &str) -> Self {
        self.mask_token = Some(token.to_string());
        self
    }

    fn map_error(&self, err: ResponseError) -> InferenceError {
        match err.kind.as_str() {
            "missing" => InferenceError::ModelMissing {
                model_id: self.spec.model_id.clone(),
            },
            "version_mismatch" => InferenceError::VersionMismatch {
                model_id: self.spec.model_id.clone(),
                requested: self.spec.revision_pin.clone(),
                available: err.available.unwrap_or_default(),
            },
            _ => InferenceError::Backend(err.message),
        }
    }
}

impl Classifier for ProcessClassifier {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn mask_token(&self) -> Option<&str> {
        self.mask_token.as_deref()
    }

    fn concurrent_safe(&self) -> bool {
        false
    }

    fn predict(&self, inputs: &[ClassifierInput]) -> Result<Vec<Vec<f64>>, InferenceError> {
        let request = Request {
            model_id: &self.spec.model_id,
            revision: &self.spec.revision_pin,
            task: self.spec.task,
            labels: &self.spec.label_set,
            inputs: inputs
                .iter()
                .map(|i| RequestInput {
                    text: &i.text,
                    aspect: i.aspect.as_deref(),
                })
                .collect(),
        };
        let payload = serde_json::to_vec(&request).expect("requests serialize");

        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => InferenceError::ModelMissing {
                    model_id: self.spec.model_id.clone(),
                },
                _ => InferenceError::Backend(format!("spawn {:?}: {e}", self.command[0])),
            })?;
        child
            .stdin
            .take()
            .expect("stdin piped")
            .write_all(&payload)
            .map_err(|e| InferenceError::Backend(format!("write request: {e}")))?;
        let output = child
            .wait_with_output()
            .map_err(|e| InferenceError::Backend(format!("wait: {e}")))?;

        let response: Response = serde_json::from_slice(&output.stdout).map_err(|e| {
            InferenceError::Backend(format!(
                "unreadable response (exit {}): {e}",
                output.status
            ))
        })?;
        if let Some(err) = response.error {
            return Err(self.map_error(err));
        }
        response
            .scores
            .ok_or_else(|| InferenceError::Backend("response carries neither scores nor error".into()))
    }
}
