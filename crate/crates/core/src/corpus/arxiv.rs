//! arXiv export API harvesting over the Atom feed.
//!
//! API docs: https://info.arxiv.org/help/api/index.html

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use super::{is_category_code, PaperRecord};

pub const DEFAULT_BASE_URL: &str = "https://export.arxiv.org/api/query";

const ATOM_NS: &str = "http://www.w3.org/2005/Atom";
const OPENSEARCH_NS: &str = "http://a9.com/-/spec/opensearch/1.1/";
const ARXIV_NS: &str = "http://arxiv.org/schemas/atom";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("unreadable feed: {0}")]
    Feed(String),
    #[error("arXiv API error: {0}")]
    Api(String),
}

#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Inclusive submission-date window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, FetchError> {
        if start > end {
            return Err(FetchError::InvalidQuery(format!(
                "window start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchQuery {
    term: String,
    window: DateWindow,
    page_size: usize,
}

impl SearchQuery {
    pub const MAX_PAGE_SIZE: usize = 2000;

    pub fn new(term: &str, window: DateWindow, page_size: usize) -> Result<Self, FetchError> {
        let term = term.trim();
        if term.is_empty() {
            return Err(FetchError::InvalidQuery("query term is empty".into()));
        }
        if !(1..=Self::MAX_PAGE_SIZE).contains(&page_size) {
            return Err(FetchError::InvalidQuery(format!(
                "page size {page_size} outside [1, {}]",
                Self::MAX_PAGE_SIZE
            )));
        }
        Ok(Self {
            term: term.to_string(),
            window,
            page_size,
        })
    }

    pub fn term(&self) -> &str {
        &self.term
    }

    pub fn window(&self) -> DateWindow {
        self.window
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    /// Field-restricted query; results are re-filtered locally.
    pub fn search_query(&self) -> String {
        let term = self.term.replace('"', "");
        format!(
            "(ti:\"{term}\" OR abs:\"{term}\") AND submittedDate:[{}0000 TO {}2359]",
            self.window.start.format("%Y%m%d"),
            self.window.end.format("%Y%m%d"),
        )
    }

    /// Case-insensitive substring match on title or abstract plus the date window.
    pub fn matches(&self, record: &PaperRecord) -> bool {
        let needle = self.term.to_lowercase();
        self.window.contains(record.submitted)
            && (record.title.to_lowercase().contains(&needle)
                || record.abstract_text.to_lowercase().contains(&needle))
    }
}

#[derive(Debug, Clone)]
pub struct HarvestConfig {
    pub base_url: Url,
    pub request_delay: Duration,
    pub max_retries: u32,
    pub retry_backoff: Duration,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        Self {
            base_url: Url::parse(DEFAULT_BASE_URL).expect("valid default URL"),
            request_delay: Duration::from_secs(3),
            max_retries: 3,
            retry_backoff: Duration::from_secs(5),
        }
    }
}

pub trait FeedTransport: Send + Sync {
    fn get(&self, url: &Url) -> Result<String, TransportError>;
}

pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl FeedTransport for HttpTransport {
    fn get(&self, url: &Url) -> Result<String, TransportError> {
        self.agent
            .get(url.as_str())
            .call()
            .map_err(|e| TransportError(e.to_string()))?
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))
    }
}

/// Serves a recorded set of feed entries, honouring `start` and
/// `max_results` the way the live API paginates. The search query itself is
/// ignored, so every recorded entry is a candidate.
pub struct ReplayTransport {
    entries: Vec<String>,
    requests: Mutex<Vec<(Url, std::time::Instant)>>,
}

impl ReplayTransport {
    pub fn new(entries: Vec<String>) -> Self {
        Self {
            entries,
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Splits a complete recorded feed into its raw `<entry>` elements.
    pub fn from_feed(xml: &str) -> Result<Self, FetchError> {
        let doc = roxmltree::Document::parse(xml).map_err(|e| FetchError::Feed(e.to_string()))?;
        let entries = doc
            .root_element()
            .children()
            .filter(|n| n.has_tag_name((ATOM_NS, "entry")))
            .map(|n| xml[n.range()].to_string())
            .collect();
        Ok(Self::new(entries))
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn requests(&self) -> Vec<(Url, std::time::Instant)> {
        self.requests.lock().unwrap().clone()
    }

    fn page(&self, start: usize, max: usize) -> String {
        let end = (start + max).min(self.entries.len());
        let body: String = self
            .entries
            .get(start..end)
            .unwrap_or_default()
            .join("\n");
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <feed xmlns=\"{ATOM_NS}\" xmlns:opensearch=\"{OPENSEARCH_NS}\" xmlns:arxiv=\"{ARXIV_NS}\">\n\
             <title>replay</title>\n\
             <opensearch:totalResults>{}</opensearch:totalResults>\n\
             <opensearch:startIndex>{start}</opensearch:startIndex>\n\
             <opensearch:itemsPerPage>{max}</opensearch:itemsPerPage>\n{body}\n</feed>\n",
            self.entries.len()
        )
    }
}

impl FeedTransport for ReplayTransport {
    fn get(&self, url: &Url) -> Result<String, TransportError> {
        self.requests
            .lock()
            .unwrap()
            .push((url.clone(), std::time::Instant::now()));
        let param = |name: &str| {
            url.query_pairs()
                .find(|(k, _)| k == name)
                .and_then(|(_, v)| v.parse::<usize>().ok())
        };
        let start = param("start").unwrap_or(0);
        let max = param("max_results").unwrap_or(10);
        Ok(self.page(start, max))
    }
}

/// A feed entry that was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseWarning {
    /// Position of the entry within its page.
    pub entry_index: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedPage {
    pub total_results: Option<usize>,
    /// Number of `<entry>` elements seen, well-formed or not.
    pub entry_count: usize,
    pub records: Vec<PaperRecord>,
    pub warnings: Vec<ParseWarning>,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn child_text<'a>(node: roxmltree::Node<'a, 'a>, ns: &str, name: &str) -> Option<String> {
    node.children()
        .find(|n| n.has_tag_name((ns, name)))
        .map(|n| n.descendants().filter_map(|d| d.text().filter(|_| d.is_text())).collect())
}

fn arxiv_id_from_url(url: &str) -> Option<String> {
    let idx = url.rfind("/abs/")?;
    let id = url[idx + "/abs/".len()..].trim_matches('/').trim();
    (!id.is_empty()).then(|| id.to_string())
}

fn parse_entry(entry: roxmltree::Node, fetched_at: DateTime<Utc>) -> Result<PaperRecord, String> {
    let id_url = child_text(entry, ATOM_NS, "id").ok_or("missing <id>")?;
    let arxiv_id = arxiv_id_from_url(id_url.trim()).ok_or("unrecognised <id>")?;
    let title = collapse_ws(&child_text(entry, ATOM_NS, "title").ok_or("missing <title>")?);
    if title.is_empty() {
        return Err("empty <title>".into());
    }
    let abstract_text = collapse_ws(&child_text(entry, ATOM_NS, "summary").ok_or("missing <summary>")?);
    let published = child_text(entry, ATOM_NS, "published").ok_or("missing <published>")?;
    let submitted = DateTime::parse_from_rfc3339(published.trim())
        .map_err(|e| format!("bad <published> {published:?}: {e}"))?
        .with_timezone(&Utc)
        .date_naive();

    let mut categories: Vec<String> = Vec::new();
    let primary = entry
        .children()
        .find(|n| n.has_tag_name((ARXIV_NS, "primary_category")))
        .and_then(|n| n.attribute("term"));
    let listed = entry
        .children()
        .filter(|n| n.has_tag_name((ATOM_NS, "category")))
        .filter_map(|n| n.attribute("term"));
    // ACM/MSC class codes also appear as <category>; only taxonomy codes are kept.
    for term in primary.into_iter().chain(listed) {
        let term = term.trim();
        if is_category_code(term) && !categories.iter().any(|c| c == term) {
            categories.push(term.to_string());
        }
    }
    if categories.is_empty() {
        return Err("no arXiv category".into());
    }

    Ok(PaperRecord {
        arxiv_id,
        title,
        abstract_text,
        categories,
        submitted,
        fetched_at,
    })
}

/// Parses one page of the Atom feed. Malformed entries are skipped with a
/// warning; an unreadable document or an API error entry fails the page.
pub fn parse_feed(xml: &str, fetched_at: DateTime<Utc>) -> Result<FeedPage, FetchError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| FetchError::Feed(e.to_string()))?;
    let feed = doc.root_element();
    if !feed.has_tag_name((ATOM_NS, "feed")) {
        return Err(FetchError::Feed(format!(
            "root element is <{}>, expected Atom <feed>",
            feed.tag_name().name()
        )));
    }
    let total_results = child_text(feed, OPENSEARCH_NS, "totalResults")
        .and_then(|t| t.trim().parse::<usize>().ok());

    let mut page = FeedPage {
        total_results,
        entry_count: 0,
        records: Vec::new(),
        warnings: Vec::new(),
    };
    for (entry_index, entry) in feed
        .children()
        .filter(|n| n.has_tag_name((ATOM_NS, "entry")))
        .enumerate()
    {
        page.entry_count += 1;
        let id = child_text(entry, ATOM_NS, "id").map(|s| s.trim().to_string());
        if id.as_deref().is_some_and(|i| i.contains("/api/errors")) {
            let msg = child_text(entry, ATOM_NS, "summary").unwrap_or_default();
            return Err(FetchError::Api(collapse_ws(&msg)));
        }
        match parse_entry(entry, fetched_at) {
            Ok(record) => page.records.push(record),
            Err(reason) => page.warnings.push(ParseWarning {
                entry_index,
                id,
                reason,
            }),
        }
    }
    Ok(page)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harvest {
    pub records: Vec<PaperRecord>,
    pub warnings: Vec<ParseWarning>,
    pub requests: usize,
}

fn split_version(id: &str) -> (&str, u32) {
    if let Some(pos) = id.rfind('v') {
        if let Ok(v) = id[pos + 1..].parse::<u32>() {
            if pos > 0 {
                return (&id[..pos], v);
            }
        }
    }
    (id, 0)
}

/// Keeps one record per base identifier, preferring the highest version.
fn dedupe_latest(records: Vec<PaperRecord>) -> Vec<PaperRecord> {
    let mut best: HashMap<String, PaperRecord> = HashMap::new();
    for record in records {
        let (base, version) = split_version(&record.arxiv_id);
        let base = base.to_string();
        match best.get(&base) {
            Some(existing) if split_version(&existing.arxiv_id).1 > version => {}
            _ => {
                best.insert(base, record);
            }
        }
    }
    best.into_values().collect()
}

pub struct ArxivClient<T> {
    transport: T,
    config: HarvestConfig,
}

impl<T: FeedTransport> ArxivClient<T> {
    pub fn new(transport: T, config: HarvestConfig) -> Self {
        Self { transport, config }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn page_url(&self, query: &SearchQuery, start: usize) -> Url {
        let mut url = self.config.base_url.clone();
        url.query_pairs_mut()
            .append_pair("search_query", &query.search_query())
            .append_pair("start", &start.to_string())
            .append_pair("max_results", &query.page_size().to_string())
            .append_pair("sortBy", "submittedDate")
            .append_pair("sortOrder", "ascending");
        url
    }

    fn get_with_retry(&self, url: &Url) -> Result<String, FetchError> {
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.retry_backoff);
            }
            match self.transport.get(url) {
                Ok(body) => return Ok(body),
                Err(e) => {
                    log::warn!("request {url} failed (attempt {}): {e}", attempt + 1);
                    last = e.0;
                }
            }
        }
        Err(FetchError::Transport {
            attempts,
            message: last,
        })
    }

    /// Pages through the feed until it is exhausted, then keeps records that
    /// mention the query term in title or abstract and fall inside the window.
    /// Results are deduplicated by identifier and sorted by
    /// (submission date, identifier).
    pub fn fetch_papers(&self, query: &SearchQuery) -> Result<Harvest, FetchError> {
        let fetched_at = DateTime::from_timestamp(Utc::now().timestamp(), 0).unwrap_or_default();
        let mut start = 0;
        let mut requests = 0;
        let mut records = Vec::new();
        let mut warnings = Vec::new();

        loop {
            if requests > 0 {
                std::thread::sleep(self.config.request_delay);
            }
            let body = self.get_with_retry(&self.page_url(query, start))?;
            requests += 1;
            let page = parse_feed(&body, fetched_at)?;
            warnings.extend(page.warnings.into_iter().map(|mut w| {
                w.entry_index += start;
                w
            }));
            records.extend(page.records);
            start += page.entry_count;

            let exhausted = match page.total_results {
                Some(total) => start >= total,
                None => page.entry_count < query.page_size(),
            };
            if page.entry_count == 0 || exhausted {
                break;
            }
        }

        let mut records: Vec<_> = dedupe_latest(records.into_iter().filter(|r| query.matches(r)).collect());
        records.sort_by(|a, b| (a.submitted, &a.arxiv_id).cmp(&(b.submitted, &b.arxiv_id)));
        Ok(Harvest {
            records,
            warnings,
            requests,
        })
    }
}
