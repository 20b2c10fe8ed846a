#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use absa_xai::corpus::{parse_feed, save_corpus};
use chrono::DateTime;

pub const THREE_FEED: &str = include_str!("../../../core/tests/fixtures/arxiv_three.xml");

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_absa-xai"));
    cmd.env_remove("ABSA_XAI_ARXIV_BASE_URL");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn write_fixture_corpus(dir: &Path) -> PathBuf {
    let records = parse_feed(THREE_FEED, DateTime::from_timestamp(0, 0).unwrap())
        .unwrap()
        .records;
    let path = dir.join("fixture_corpus.jsonl");
    save_corpus(&records, &path).unwrap();
    path
}

/// Config for the built-in synthetic models with a private cache.
pub fn synthetic_config(dir: &Path, samples: usize) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!(
            r#"cache_dir = "{}"
parallelism = 2
seed = 11

[models]
overall = "synthetic/lexicon-stars"
overall_revision = "1"
aspect = "synthetic/lexicon-absa"
aspect_revision = "1"

[explain]
samples = {samples}
"#,
            dir.join("cache").display()
        ),
    )
    .unwrap();
    path
}

/// Every file under `root` by relative path. The manifest's timestamp is
/// blanked so that two runs can be compared byte for byte.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            let mut bytes = std::fs::read(&path).unwrap();
            if rel.ends_with("manifest.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v["generated_at"] = serde_json::Value::Null;
                bytes = serde_json::to_vec(&v).unwrap();
            }
            out.insert(rel, bytes);
        }
    }
    out
}
