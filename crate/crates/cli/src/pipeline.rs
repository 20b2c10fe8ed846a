//! The pipeline commands. Each reads and writes fixed file names inside the
//! run directory.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use absa_xai::aspects::{
    detect_divergence, extract_aspects, read_aspect_results, score_aspects, score_terms,
    write_aspect_results, AspectParams, AspectRecord,
};
use absa_xai::corpus::{
    build_document, load_corpus, save_corpus, AbstractDocument, ArxivClient, DateWindow,
    HarvestConfig, HttpTransport, PaperRecord, SearchQuery,
};
use absa_xai::explain::{
    explain_document, read_attributions, render_heatmap, write_attributions, Attribution,
    ExplainParams, HeatmapFormat, Unit,
};
use absa_xai::inference::{
    classify_overall, top_label, CachedClassifier, Classifier, InferenceError, LabelDistribution,
    ModelRegistry, ModelSpec, ProcessClassifier, ScoreCache, Serialized, Task,
};
use absa_xai::report::{
    category_distribution, divergence_table, emit_report, star_distribution, HeatmapEntry,
    ReportBundle, MANIFEST_FILE,
};
use absa_xai::write_atomic;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, BASE_URL_ENV};
use crate::error::{CliError, ErrorKind};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const OVERALL_FILE: &str = "overall.jsonl";
pub const ATTRIBUTIONS_FILE: &str = "attributions.jsonl";
pub const ASPECTS_FILE: &str = "aspects.jsonl";
pub const EXPLAIN_DIR: &str = "explain";
pub const REPORT_DIR: &str = "report";

/// Line of the overall results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRecord {
    pub doc_id: String,
    pub top_label: String,
    pub distribution: LabelDistribution,
}

pub struct Context {
    pub cfg: RunConfig,
    registry: ModelRegistry,
    cache: Option<Arc<ScoreCache>>,
    pool: rayon::ThreadPool,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(ErrorKind::Io, format!("{}: {e}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes()).map_err(|e| io_error(path, e))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::data(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn require(path: &Path, producer: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "expected file {} is missing; run `absa-xai {producer}` first",
            path.display()
        )))
    }
}

/// Document ids become file names; old-style arXiv ids contain a slash.
fn file_stem(doc_id: &str) -> String {
    doc_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect()
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let cache = if cfg.use_cache {
            let dir = cfg.resolved_cache_dir();
            Some(Arc::new(ScoreCache::open(&dir).map_err(|e| io_error(&dir, e))?))
        } else {
            None
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
        Ok(Self {
            cfg,
            registry: ModelRegistry::with_builtins(),
            cache,
            pool,
        })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    /// The configured model for `task`: a built-in synthetic model, or the
    /// external command for any other id.
    fn raw_model(&self, task: Task) -> Result<Arc<dyn Classifier>, CliError> {
        let m = &self.cfg.models;
        let (id, revision) = match task {
            Task::OverallSentiment => (&m.overall, &m.overall_revision),
            Task::AspectSentiment => (&m.aspect, &m.aspect_revision),
        };
        let base: Arc<dyn Classifier> = match self.registry.resolve(id, revision) {
            Ok(model) => model,
            Err(InferenceError::ModelMissing { .. }) if !m.command.is_empty() => {
                let spec = ModelSpec::new(id, task, revision, m.max_input_units);
                let mut p = ProcessClassifier::new(spec, m.command.clone());
                if let Some(token) = &m.mask_token {
                    p = p.with_mask_token(token);
                }
                Arc::new(p)
            }
            Err(e) => return Err(e.into()),
        };
        let actual = base.spec().task;
        if actual != task {
            return Err(InferenceError::TaskMismatch {
                model_id: id.clone(),
                expected: task,
                actual,
            }
            .into());
        }
        Ok(if base.concurrent_safe() {
            base
        } else {
            Arc::new(Serialized::new(base))
        })
    }

    /// Like `raw_model`, wrapped in the score cache unless caching is off.
    /// Explanations use the raw model: their coalition texts are unique and
    /// the estimators already memoize them within a run.
    pub fn model(&self, task: Task) -> Result<Arc<dyn Classifier>, CliError> {
        let base = self.raw_model(task)?;
        Ok(match &self.cache {
            Some(cache) => Arc::new(CachedClassifier::new(base, Arc::clone(cache))),
            None => base,
        })
    }

    fn documents(&self, doc: Option<&str>) -> Result<(Vec<PaperRecord>, Vec<AbstractDocument>), CliError> {
        let path = self.out(CORPUS_FILE);
        require(&path, "fetch")?;
        let mut records = load_corpus(&path)?;
        if let Some(id) = doc {
            records.retain(|r| r.arxiv_id == id);
            if records.is_empty() {
                return Err(CliError::data(format!("document {id} is not in {}", path.display())));
            }
        }
        let docs = records
            .iter()
            .map(build_document)
            .collect::<Result<Vec<_>, _>>()?;
        Ok((records, docs))
    }

    pub fn fetch(&self) -> Result<PathBuf, CliError> {
        let cfg = &self.cfg;
        let window = DateWindow::new(cfg.start_date, cfg.end_date)?;
        let query = SearchQuery::new(&cfg.query_term, window, cfg.page_size)?;
        let raw_url = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| cfg.arxiv_base_url.clone());
        let base_url = url::Url::parse(&raw_url)
            .map_err(|e| CliError::config(format!("arXiv base URL {raw_url:?}: {e}")))?;
        let harvest = HarvestConfig {
            base_url,
            request_delay: Duration::from_secs_f64(cfg.request_delay_secs),
            max_retries: cfg.max_retries,
            retry_backoff: Duration::from_secs_f64(cfg.retry_backoff_secs),
        };
        let transport = HttpTransport::new(Duration::from_secs_f64(cfg.request_timeout_secs));
        let result = ArxivClient::new(transport, harvest).fetch_papers(&query)?;
        for w in &result.warnings {
            warn!("skipped entry {} ({}): {}", w.entry_index, w.id.as_deref().unwrap_or("?"), w.reason);
        }
        let path = self.out(CORPUS_FILE);
        save_corpus(&result.records, &path)?;
        println!(
            "wrote {} ({} papers, {} skipped, {} requests)",
            path.display(),
            result.records.len(),
            result.warnings.len(),
            result.requests
        );
        Ok(path)
    }

    /// Copies a prefetched corpus into the run directory.
    pub fn import_corpus(&self, source: &Path) -> Result<PathBuf, CliError> {
        let records = load_corpus(source)?;
        let path = self.out(CORPUS_FILE);
        save_corpus(&records, &path)?;
        println!("wrote {} ({} papers from {})", path.display(), records.len(), source.display());
        Ok(path)
    }

    pub fn classify(&self) -> Result<PathBuf, CliError> {
        let model = self.model(Task::OverallSentiment)?;
        let (_, docs) = self.documents(None)?;
        let records: Vec<OverallRecord> = self.pool.install(|| {
            docs.par_iter()
                .map(|d| {
                    let distribution = classify_overall(&d.text, model.as_ref())
                        .map_err(|e| CliError::from(e).context(&d.source_id))?;
                    if distribution.truncated {
                        warn!("{}: input truncated to the model window", d.source_id);
                    }
                    Ok(OverallRecord {
                        doc_id: d.source_id.clone(),
                        top_label: top_label(&distribution).to_string(),
                        distribution,
                    })
                })
                .collect::<Result<_, CliError>>()
        })?;
        let path = self.out(OVERALL_FILE);
        write_jsonl(&path, &records)?;
        println!("wrote {} ({} documents)", path.display(), records.len());
        Ok(path)
    }

    fn explain_params(&self) -> ExplainParams {
        let e = &self.cfg.explain;
        ExplainParams {
            estimator: e.estimator,
            unit: Unit::Word,
            samples: e.samples,
            seed: self.cfg.seed,
            exact_limit: e.exact_limit,
            top_k: e.top_k,
            placeholder: e.placeholder.clone(),
        }
    }

    fn explain_docs(&self, docs: &[AbstractDocument], target: Option<&str>) -> Result<Vec<Attribution>, CliError> {
        let model = self.model(Task::OverallSentiment)?;
        let raw = self.raw_model(Task::OverallSentiment)?;
        let params = self.explain_params();
        let target = target.or(self.cfg.explain.target.as_deref());
        self.pool.install(|| {
            docs.par_iter()
                .map(|d| {
                    let label = match target {
                        Some(t) => t.to_string(),
                        None => top_label(&classify_overall(&d.text, model.as_ref())?).to_string(),
                    };
                    explain_document(raw.as_ref(), d, &label, None, &params)
                        .map_err(|e| CliError::from(e).context(&d.source_id))
                })
                .collect()
        })
    }

    /// Explains one document (writing its attribution and an HTML heatmap
    /// under `explain/`) or, without `doc`, every document.
    pub fn explain(
        &self,
        doc: Option<&str>,
        target: Option<&str>,
        format: HeatmapFormat,
    ) -> Result<PathBuf, CliError> {
        let (_, docs) = self.documents(doc)?;
        let attributions = self.explain_docs(&docs, target)?;
        let Some(id) = doc else {
            let path = self.out(ATTRIBUTIONS_FILE);
            write_attributions(&path, &attributions)?;
            println!("wrote {} ({} documents)", path.display(), attributions.len());
            return Ok(path);
        };
        let (a, d) = (&attributions[0], &docs[0]);
        let dir = self.out(EXPLAIN_DIR);
        let stem = file_stem(id);
        let path = dir.join(format!("{stem}.jsonl"));
        write_attributions(&path, std::slice::from_ref(a))?;
        let html = render_heatmap(a, &d.text, HeatmapFormat::Html)?;
        let html_path = dir.join(format!("{stem}.html"));
        write_atomic(&html_path, html.as_bytes()).map_err(|e| io_error(&html_path, e))?;
        println!(
            "{} target={:?} estimator={} base={:.4} full={:.4}",
            a.doc_id,
            a.target_label,
            a.estimator.as_str(),
            a.base_value,
            a.full_value
        );
        let shown = match format {
            HeatmapFormat::Ansi => render_heatmap(a, &d.text, HeatmapFormat::Ansi)?,
            HeatmapFormat::Html => html,
        };
        println!("{shown}");
        println!("wrote {} and {}", path.display(), html_path.display());
        Ok(path)
    }

    /// Scores aspects for one or all documents. Terms come from `terms`, else
    /// the configured list, else extraction from `attributions.jsonl`.
    pub fn aspects(&self, doc: Option<&str>, terms: &[String]) -> Result<PathBuf, CliError> {
        let (_, docs) = self.documents(doc)?;
        let fixed: &[String] = if !terms.is_empty() { terms } else { &self.cfg.aspects.terms };
        let attributions: HashMap<String, Attribution> = if fixed.is_empty() {
            let path = self.out(ATTRIBUTIONS_FILE);
            require(&path, "explain")?;
            read_attributions(&path)?
                .into_iter()
                .map(|a| (a.doc_id.clone(), a))
                .collect()
        } else {
            HashMap::new()
        };
        let model = self.model(Task::AspectSentiment)?;
        let params = AspectParams {
            tau_quantile: self.cfg.aspects.tau_quantile,
            max_candidates: self.cfg.aspects.max_candidates,
        };
        let per_doc: Vec<Vec<AspectRecord>> = self.pool.install(|| {
            docs.par_iter()
                .map(|d| -> Result<Vec<AspectRecord>, CliError> {
                    if !fixed.is_empty() {
                        let terms: Vec<&str> = fixed.iter().map(String::as_str).collect();
                        let results = score_terms(d, &terms, model.as_ref())
                            .map_err(|e| CliError::from(e).context(&d.source_id))?;
                        return Ok(results.iter().map(|r| AspectRecord::new(r, None)).collect());
                    }
                    let attribution = attributions.get(&d.source_id).ok_or_else(|| {
                        CliError::data(format!(
                            "no attribution for {} in {}",
                            d.source_id,
                            self.out(ATTRIBUTIONS_FILE).display()
                        ))
                    })?;
                    let candidates = extract_aspects(d, attribution, &params)
                        .map_err(|e| CliError::from(e).context(&d.source_id))?;
                    if candidates.is_empty() {
                        info!("{}: no aspect candidates", d.source_id);
                        return Ok(Vec::new());
                    }
                    let results = score_aspects(d, &candidates, model.as_ref())
                        .map_err(|e| CliError::from(e).context(&d.source_id))?;
                    Ok(results
                        .iter()
                        .zip(&candidates)
                        .map(|(r, c)| AspectRecord::new(r, Some(c.salience)))
                        .collect())
                })
                .collect::<Result<_, _>>()
        })?;
        let records: Vec<AspectRecord> = per_doc.into_iter().flatten().collect();
        let path = self.out(ASPECTS_FILE);
        write_aspect_results(&path, &records)?;
        println!("wrote {} ({} aspect results)", path.display(), records.len());
        Ok(path)
    }

    pub fn report(&self) -> Result<PathBuf, CliError> {
        let (records, docs) = self.documents(None)?;
        let overall_path = self.out(OVERALL_FILE);
        require(&overall_path, "classify")?;
        let overall: Vec<OverallRecord> = read_jsonl(&overall_path)?;
        let pairs: Vec<(String, LabelDistribution)> = overall
            .iter()
            .map(|r| (r.doc_id.clone(), r.distribution.clone()))
            .collect();
        let by_doc: BTreeMap<&str, &LabelDistribution> =
            overall.iter().map(|r| (r.doc_id.as_str(), &r.distribution)).collect();

        let aspects_path = self.out(ASPECTS_FILE);
        let divergence = if aspects_path.is_file() {
            let mut grouped: BTreeMap<String, Vec<_>> = BTreeMap::new();
            for r in read_aspect_results(&aspects_path)? {
                grouped
                    .entry(r.doc_id.clone())
                    .or_default()
                    .push(r.to_sentiment().map_err(|e| CliError::data(e.to_string()))?);
            }
            let mut findings = Vec::new();
            for (doc_id, sentiments) in &grouped {
                let dist = by_doc.get(doc_id.as_str()).ok_or_else(|| {
                    CliError::data(format!("{doc_id} has aspect results but no entry in {}", overall_path.display()))
                })?;
                findings.extend(detect_divergence(dist, sentiments).map_err(|e| CliError::data(e.to_string()))?);
            }
            Some(divergence_table(&findings))
        } else {
            None
        };

        let attributions_path = self.out(ATTRIBUTIONS_FILE);
        let mut heatmaps = Vec::new();
        if attributions_path.is_file() {
            let texts: HashMap<&str, &str> =
                docs.iter().map(|d| (d.source_id.as_str(), d.text.as_str())).collect();
            for a in read_attributions(&attributions_path)? {
                let text = texts.get(a.doc_id.as_str()).ok_or_else(|| {
                    CliError::data(format!("attribution for unknown document {}", a.doc_id))
                })?;
                heatmaps.push(HeatmapEntry {
                    html: render_heatmap(&a, text, HeatmapFormat::Html)?,
                    doc_id: a.doc_id,
                    target_label: a.target_label,
                });
            }
        }

        let bundle = ReportBundle {
            stars: Some(star_distribution(&pairs)?),
            categories: Some(category_distribution(&records)?),
            divergence,
            heatmaps,
            config: serde_json::to_value(self.cfg.analysis_settings()).expect("settings serialize"),
        };
        let dir = self.out(REPORT_DIR);
        let manifest = emit_report(&bundle, &self.cfg.report.formats, &dir)?;
        for f in &manifest.files {
            println!("wrote {}", dir.join(&f.path).display());
        }
        let path = dir.join(MANIFEST_FILE);
        println!("wrote {}", path.display());
        Ok(path)
    }

    /// Fetch (or import `corpus`), classify, explain, aspects, report.
    pub fn run_all(&self, corpus: Option<&Path>) -> Result<PathBuf, CliError> {
        match corpus.or(self.cfg.corpus_file.as_deref()) {
            Some(source) => self.import_corpus(source)?,
            None => self.fetch()?,
        };
        self.classify()?;
        self.explain(None, None, HeatmapFormat::Html)?;
        self.aspects(None, &[])?;
        self.report()
    }
}

impl CliError {
    fn context(self, doc_id: &str) -> Self {
        Self {
            message: format!("{doc_id}: {}", self.message),
            ..self
        }
    }
}
