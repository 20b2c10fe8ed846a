//! Run configuration: TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use absa_xai::corpus::DEFAULT_BASE_URL;
use absa_xai::explain::{Estimator, DEFAULT_EXACT_LIMIT, DEFAULT_SAMPLES};
use absa_xai::inference::{DEFAULT_ASPECT_MODEL, DEFAULT_OVERALL_MODEL};
use absa_xai::report::ReportFormat;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const BASE_URL_ENV: &str = "ABSA_XAI_ARXIV_BASE_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub query_term: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub page_size: usize,
    pub arxiv_base_url: String,
    pub request_delay_secs: f64,
    pub max_retries: u32,
    pub retry_backoff_secs: f64,
    pub request_timeout_secs: f64,
    /// Prefetched corpus used by `run-all` instead of querying arXiv.
    pub corpus_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
    pub parallelism: usize,
    pub seed: u64,
    pub models: ModelsConfig,
    pub explain: ExplainConfig,
    pub aspects: AspectsConfig,
    pub report: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    pub overall: String,
    pub overall_revision: String,
    pub aspect: String,
    pub aspect_revision: String,
    /// External classifier program for model ids outside the built-in registry.
    pub command: Vec<String>,
    pub max_input_units: usize,
    pub mask_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub estimator: Estimator,
    pub samples: usize,
    pub exact_limit: usize,
    pub top_k: usize,
    /// Label to explain; the document's top label when unset.
    pub target: Option<String>,
    pub placeholder: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AspectsConfig {
    pub tau_quantile: f64,
    pub max_candidates: usize,
    /// Fixed aspect terms scored for every document instead of extraction.
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub formats: Vec<ReportFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            query_term: "chatgpt".into(),
            start_date: NaiveDate::from_ymd_opt(2022, 12, 8).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2023, 7, 24).unwrap(),
            page_size: 200,
            arxiv_base_url: DEFAULT_BASE_URL.into(),
            request_delay_secs: 3.0,
            max_retries: 3,
            retry_backoff_secs: 5.0,
            request_timeout_secs: 60.0,
            corpus_file: None,
            out_dir: PathBuf::from("run"),
            cache_dir: None,
            use_cache: true,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0,
            models: ModelsConfig::default(),
            explain: ExplainConfig::default(),
            aspects: AspectsConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            overall: DEFAULT_OVERALL_MODEL.into(),
            overall_revision: "main".into(),
            aspect: DEFAULT_ASPECT_MODEL.into(),
            aspect_revision: "main".into(),
            command: Vec::new(),
            max_input_units: 512,
            mask_token: None,
        }
    }
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Hierarchical,
            samples: DEFAULT_SAMPLES,
            exact_limit: DEFAULT_EXACT_LIMIT,
            top_k: 3,
            target: None,
            placeholder: None,
        }
    }
}

impl Default for AspectsConfig {
    fn default() -> Self {
        Self {
            tau_quantile: absa_xai::aspects::DEFAULT_TAU_QUANTILE,
            max_candidates: absa_xai::aspects::DEFAULT_MAX_CANDIDATES,
            terms: Vec::new(),
        }
    }
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            formats: ReportFormat::ALL.to_vec(),
        }
    }
}

/// The parts of a config that determine results. Paths are left out so that
/// runs in different directories produce identical reports.
#[derive(Serialize)]
pub struct AnalysisSettings<'a> {
    pub query_term: &'a str,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub seed: u64,
    pub models: &'a ModelsConfig,
    pub explain: &'a ExplainConfig,
    pub aspects: &'a AspectsConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::config(m));
        if self.query_term.trim().is_empty() {
            return bad("query_term must not be empty".into());
        }
        if self.start_date > self.end_date {
            return bad(format!("start_date {} is after end_date {}", self.start_date, self.end_date));
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.aspects.tau_quantile) {
            return bad(format!("aspects.tau_quantile {} is outside [0, 1]", self.aspects.tau_quantile));
        }
        if self.explain.estimator != Estimator::Exact && self.explain.samples == 0 {
            return bad("explain.samples must be at least 1 for sampling estimators".into());
        }
        if self.models.max_input_units == 0 {
            return bad("models.max_input_units must be at least 1".into());
        }
        for secs in [self.request_delay_secs, self.retry_backoff_secs, self.request_timeout_secs] {
            if !(secs.is_finite() && secs >= 0.0) {
                return bad(format!("durations must be non-negative seconds, got {secs}"));
            }
        }
        if self.report.formats.is_empty() {
            return bad("report.formats must name at least one format".into());
        }
        Ok(())
    }

    pub fn analysis_settings(&self) -> AnalysisSettings<'_> {
        AnalysisSettings {
            query_term: &self.query_term,
            start_date: self.start_date,
            end_date: self.end_date,
            seed: self.seed,
            models: &self.models,
            explain: &self.explain,
            aspects: &self.aspects,
        }
    }

    /// `cache_dir`, else `$XDG_CACHE_HOME/absa-xai`, else `~/.cache/absa-xai`,
    /// else a directory under the system temp dir.
    pub fn resolved_cache_dir(&self) -> PathBuf {
        if let Some(dir) = &self.cache_dir {
            return dir.clone();
        }
        let base = std::env::var_os("XDG_CACHE_HOME")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
            .unwrap_or_else(std::env::temp_dir);
        base.join("absa-xai")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 9
            [models]
            overall = "synthetic/lexicon-stars"
            [aspects]
            terms = ["education"]
            [report]
            formats = ["structured"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.models.overall, "synthetic/lexicon-stars");
        assert_eq!(cfg.models.aspect, DEFAULT_ASPECT_MODEL);
        assert_eq!(cfg.explain.samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.report.formats, vec![ReportFormat::Structured]);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("seeed = 1").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.parallelism = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.start_date = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        assert!(cfg.validate().is_err());
    }
}
