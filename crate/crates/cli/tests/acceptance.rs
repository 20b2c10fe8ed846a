//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Criterion 7 needs real model weights. It runs only when
//! `ABSA_XAI_MODEL_COMMAND` names a process classifier (see
//! `scripts/hf_classifier.py`) and is reported as SKIP otherwise.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use absa_xai::aspects::{detect_divergence, score_terms};
use absa_xai::corpus::{build_document, parse_feed, PaperRecord};
use absa_xai::explain::{
    explain_document, mask_apply, sentence_word_groups, shapley_exact, shapley_hierarchical,
    shapley_permutation, Coalition, Estimator, ExplainParams, FeatureSegmentation, GameFn,
    HierarchyParams, TextGame, Unit,
};
use absa_xai::inference::{
    classify_overall, cumulative_probability, top_label, LabelDistribution,
    LexiconModel, ModelSpec, ProcessClassifier, Task, DEFAULT_ASPECT_MODEL, DEFAULT_OVERALL_MODEL,
    STAR_LABELS,
};
use absa_xai::report::{category_distribution, star_distribution};
use chrono::{DateTime, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AXIOM_TOL: f64 = 1e-9;
const PERMUTATION_SAMPLES: usize = 2000;
const PERMUTATION_REL_TOL: f64 = 0.05;
const ADDITIVE_TOL: f64 = 1e-12;
const HIERARCHY_TOL: f64 = 1e-9;
const CUMULATIVE_TOL: f64 = 1e-4;
const SCORE_TOL: f64 = 0.02;
const RANDOM_GAMES: usize = 120;
const MODEL_COMMAND_ENV: &str = "ABSA_XAI_MODEL_COMMAND";

const MALFORMED_FEED: &str = include_str!("../../core/tests/fixtures/arxiv_malformed.xml");

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, || format!("{what}: {a} vs {b} (tol {tol:e})"))
}

fn mask_of(c: &Coalition) -> usize {
    c.members().fold(0, |m, i| m | 1 << i)
}

/// Brute-force Shapley values from factorial weights over all 2^n coalitions.
fn oracle(n: usize, v: &dyn Fn(usize) -> f64) -> Vec<f64> {
    let fact: Vec<f64> = (0..=n).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    })
    .collect();
    (0..n)
        .map(|i| {
            let mut phi = 0.0;
            for s in 0..(1usize << n) {
                if s & (1 << i) != 0 {
                    continue;
                }
                let size = s.count_ones() as usize;
                let w = fact[size] * fact[n - size - 1] / fact[n];
                phi += w * (v(s | 1 << i) - v(s));
            }
            phi
        })
        .collect()
}

fn random_table(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..1usize << n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn table_game(n: usize, table: Vec<f64>) -> GameFn<impl Fn(&Coalition) -> f64 + Sync> {
    GameFn::new(n, move |c: &Coalition| table[mask_of(c)])
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20230724);
    let mut worst_exact = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for g in 0..RANDOM_GAMES {
        let n = g % 10 + 1;
        let table = random_table(n, &mut rng);
        let truth = oracle(n, &|s| table[s]);
        let exact = shapley_exact(&table_game(n, table.clone()), 12).map_err(|e| e.to_string())?;

        close(exact.efficiency_gap(), 0.0, AXIOM_TOL, &format!("game {g} efficiency"))?;
        for (i, (p, t)) in exact.phi.iter().zip(&truth).enumerate() {
            close(*p, *t, AXIOM_TOL, &format!("game {g} player {i} vs oracle"))?;
            worst_exact = worst_exact.max((p - t).abs());
        }

        // Symmetry: players i and j are interchangeable.
        if n >= 2 {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i != j {
                let base = random_table(n, &mut rng);
                let canon = move |s: usize| {
                    let (hi, hj) = (s >> i & 1, s >> j & 1);
                    if hi == 0 && hj == 1 {
                        (s | 1 << i) & !(1 << j)
                    } else {
                        s
                    }
                };
                let sym = GameFn::new(n, move |c: &Coalition| base[canon(mask_of(c))]);
                let phi = shapley_exact(&sym, 12).map_err(|e| e.to_string())?.phi;
                close(phi[i], phi[j], AXIOM_TOL, &format!("game {g} symmetry {i}/{j}"))?;
            }
        }

        // Dummy: player d adds a constant c to every coalition.
        let d = rng.random_range(0..n);
        let c = rng.random_range(-1.0..1.0);
        let base = random_table(n, &mut rng);
        let dummy = GameFn::new(n, move |co: &Coalition| {
            let s = mask_of(co);
            base[s & !(1 << d)] + if s >> d & 1 == 1 { c } else { 0.0 }
        });
        let phi = shapley_exact(&dummy, 12).map_err(|e| e.to_string())?.phi;
        close(phi[d], c, AXIOM_TOL, &format!("game {g} dummy"))?;

        // Linearity.
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let other = random_table(n, &mut rng);
        let mixed: Vec<f64> = table.iter().zip(&other).map(|(x, y)| a * x + b * y).collect();
        let pv = exact.phi.clone();
        let pw = shapley_exact(&table_game(n, other), 12).map_err(|e| e.to_string())?.phi;
        let pm = shapley_exact(&table_game(n, mixed), 12).map_err(|e| e.to_string())?.phi;
        for i in 0..n {
            close(pm[i], a * pv[i] + b * pw[i], AXIOM_TOL, &format!("game {g} linearity"))?;
        }

        let range = table.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - table.iter().copied().fold(f64::INFINITY, f64::min);
        let sampled = shapley_permutation(&table_game(n, table), PERMUTATION_SAMPLES, 7)
            .map_err(|e| e.to_string())?;
        for (i, (p, t)) in sampled.phi.iter().zip(&truth).enumerate() {
            let err = (p - t).abs();
            let limit = PERMUTATION_REL_TOL * range;
            ensure(err <= limit, || {
                format!("game {g} player {i}: permutation error {err} > {limit}")
            })?;
            worst_ratio = worst_ratio.max(err / range.max(f64::MIN_POSITIVE));
        }
    }
    Ok(format!(
        "{RANDOM_GAMES} games, max exact error {worst_exact:.1e}, max permutation error {:.4} x range",
        worst_ratio
    ))
}

const NEUTRAL_WORDS: &[&str] = &["the", "model", "data", "study", "users", "code", "we", "results", "text"];
const VALENCE_WORDS: &[&str] = &[
    "promising", "excellent", "useful", "bias", "risks", "failures", "accurate", "misuse", "improve",
    "harmful", "benefits", "concerns",
];

fn random_words(rng: &mut ChaCha8Rng, len: usize) -> Vec<&'static str> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.5) {
                VALENCE_WORDS[rng.random_range(0..VALENCE_WORDS.len())]
            } else {
                NEUTRAL_WORDS[rng.random_range(0..NEUTRAL_WORDS.len())]
            }
        })
        .collect()
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut games = 0;
    for _ in 0..40 {
        let n = rng.random_range(1..=10);
        let bias = rng.random_range(-1.0..1.0);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let weights = w.clone();
        let game = GameFn::new(n, move |c: &Coalition| bias + c.members().map(|i| weights[i]).sum::<f64>());
        for values in [
            shapley_exact(&game, 12).map_err(|e| e.to_string())?,
            shapley_permutation(&game, PERMUTATION_SAMPLES, 3).map_err(|e| e.to_string())?,
        ] {
            for i in 0..n {
                close(values.phi[i], w[i], ADDITIVE_TOL, "weighted sum game")?;
            }
        }
        games += 1;
    }

    let model = LexiconModel::builtin_overall();
    let bias = model.logits("", None);
    for _ in 0..40 {
        let n = rng.random_range(1..=10);
        let text = random_words(&mut rng, n).join(" ");
        let label = rng.random_range(0..STAR_LABELS.len());
        let seg = FeatureSegmentation::words(&text);
        let expected: Vec<f64> = seg
            .spans
            .iter()
            .map(|s| model.logits(&text[s.start..s.end], None)[label] - bias[label])
            .collect();
        let game = GameFn::new(seg.len(), |c: &Coalition| {
            model.logits(&mask_apply(&text, &seg, c, "[MASK]"), None)[label]
        });
        for values in [
            shapley_exact(&game, 12).map_err(|e| e.to_string())?,
            shapley_permutation(&game, PERMUTATION_SAMPLES, 5).map_err(|e| e.to_string())?,
        ] {
            for (i, e) in expected.iter().enumerate() {
                close(values.phi[i], *e, ADDITIVE_TOL, &format!("lexicon game {text:?}"))?;
            }
        }
        games += 1;
    }
    Ok(format!("{games} additive games, both estimators"))
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn synthetic_record(id: &str, rng: &mut ChaCha8Rng) -> PaperRecord {
    let sentences: Vec<String> = (0..rng.random_range(2..=6))
        .map(|_| {
            let len = rng.random_range(3..=16);
            let mut words: Vec<String> = random_words(rng, len).into_iter().map(String::from).collect();
            words[0] = capitalize(&words[0]);
            format!("{}.", words.join(" "))
        })
        .collect();
    let title = capitalize(&random_words(rng, 4).join(" "));
    PaperRecord {
        arxiv_id: id.to_string(),
        title,
        abstract_text: sentences.join(" "),
        categories: vec!["cs.CL".into()],
        submitted: NaiveDate::from_ymd_opt(2023, 3, 1).unwrap(),
        fetched_at: DateTime::from_timestamp(0, 0).unwrap(),
    }
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = LexiconModel::builtin_overall();
    let mut refined_total = 0;
    let docs = 25;
    for d in 0..docs {
        let doc = build_document(&synthetic_record(&format!("synthetic-{d}"), &mut rng))
            .map_err(|e| e.to_string())?;
        let target = STAR_LABELS[d % STAR_LABELS.len()];
        let seg = FeatureSegmentation::words(&doc.text);
        let (_, groups) = sentence_word_groups(&doc);
        let game = TextGame::new(&model, &doc.text, &seg, target).map_err(|e| e.to_string())?;
        let params = HierarchyParams {
            top_k: 3,
            exact_limit: 12,
            samples: 500,
            seed: d as u64,
        };
        let h = shapley_hierarchical(&game, &groups, &params).map_err(|e| e.to_string())?;
        close(h.sentences.efficiency_gap(), 0.0, HIERARCHY_TOL, &format!("doc {d} sentence efficiency"))?;
        ensure(!h.refined.is_empty(), || format!("doc {d}: nothing refined"))?;
        for r in &h.refined {
            let sum: f64 = r.values.phi.iter().sum();
            close(sum, h.sentences.phi[r.sentence], HIERARCHY_TOL, &format!("doc {d} sentence {}", r.sentence))?;
            refined_total += 1;
        }

        let explain = ExplainParams {
            estimator: Estimator::Hierarchical,
            unit: Unit::Word,
            samples: 500,
            seed: d as u64,
            ..ExplainParams::default()
        };
        let attr = explain_document(&model, &doc, target, None, &explain).map_err(|e| e.to_string())?;
        close(attr.efficiency_gap(), 0.0, HIERARCHY_TOL, &format!("doc {d} attribution efficiency"))?;
    }
    Ok(format!("{docs} documents, {refined_total} refined sentences"))
}

fn truthfulness_scores() -> LabelDistribution {
    LabelDistribution::from_pairs(
        &STAR_LABELS,
        &[
            ("3 stars", 0.37044963240623474),
            ("2 stars", 0.32270216941833496),
            ("4 stars", 0.17089851200580597),
            ("1 star", 0.10217782855033875),
            ("5 stars", 0.033771809190511703),
        ],
        DEFAULT_OVERALL_MODEL,
    )
    .unwrap()
}

fn education_scores() -> LabelDistribution {
    LabelDistribution::from_pairs(
        &STAR_LABELS,
        &[
            ("4 stars", 0.5352276563644409),
            ("5 stars", 0.35541731119155884),
            ("3 stars", 0.07598904520273209),
            ("2 stars", 0.023732537403702736),
            ("1 star", 0.009633398614823818),
        ],
        DEFAULT_OVERALL_MODEL,
    )
    .unwrap()
}

fn criterion_4() -> Check {
    let neg = cumulative_probability(&truthfulness_scores(), &["1 star", "2 stars", "3 stars"]).map_err(|e| e.to_string())?;
    let pos = cumulative_probability(&education_scores(), &["4 stars", "5 stars"]).map_err(|e| e.to_string())?;
    close(neg, 0.7953, CUMULATIVE_TOL, "1-3 stars")?;
    close(pos, 0.8906, CUMULATIVE_TOL, "4-5 stars")?;
    ensure(top_label(&truthfulness_scores()) == "3 stars", || "first list argmax".into())?;
    ensure(top_label(&education_scores()) == "4 stars", || "second list argmax".into())?;
    Ok(format!("{neg:.4} and {pos:.4}"))
}

fn record_with_category(id: usize, category: &str) -> PaperRecord {
    PaperRecord {
        arxiv_id: format!("2303.{id:05}v1"),
        title: format!("Paper {id}"),
        abstract_text: "Text.".into(),
        categories: vec![category.into(), "cs.AI".into()],
        submitted: NaiveDate::from_ymd_opt(2023, 3, 1).unwrap(),
        fetched_at: DateTime::from_timestamp(0, 0).unwrap(),
    }
}

fn criterion_5() -> Check {
    // Injected top labels: 13 / 27 / 24 / 121 / 15 of 200.
    let counts = [13usize, 27, 24, 121, 15];
    let expected = [6.5, 13.5, 12.0, 60.5, 7.5];
    let mut results = Vec::new();
    for (k, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let pairs: Vec<(&str, f64)> = STAR_LABELS
                .iter()
                .enumerate()
                .map(|(j, l)| (*l, if j == k { 0.6 } else { 0.1 }))
                .collect();
            let dist = LabelDistribution::from_pairs(&STAR_LABELS, &pairs, "injected").map_err(|e| e.to_string())?;
            results.push((format!("doc-{}", results.len()), dist));
        }
    }
    results.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let stars = star_distribution(&results).map_err(|e| e.to_string())?;
    ensure(stars.total_docs == 200, || format!("total {}", stars.total_docs))?;
    for (k, label) in STAR_LABELS.iter().enumerate() {
        ensure(stars.percent_by_star[*label] == expected[k], || {
            format!("{label}: {} vs {}", stars.percent_by_star[*label], expected[k])
        })?;
        ensure(stars.top_label_counts[*label] == counts[k], || format!("{label} count"))?;
    }

    let fixture = parse_feed(common::THREE_FEED, DateTime::from_timestamp(0, 0).unwrap())
        .map_err(|e| e.to_string())?
        .records;
    let cats = category_distribution(&fixture).map_err(|e| e.to_string())?;
    let ranked = cats.ranked();
    ensure(
        ranked == vec![("cs.CL", 1, 33.3), ("cs.CY", 1, 33.3), ("cs.SE", 1, 33.3)],
        || format!("fixture categories {ranked:?}"),
    )?;

    // 8 / 4 / 3 / 1 of 16: the last two exercise half-up rounding.
    let mut corpus = Vec::new();
    for (category, n) in [("cs.CL", 8), ("cs.AI", 4), ("cs.CY", 3), ("cs.SE", 1)] {
        for _ in 0..n {
            corpus.push(record_with_category(corpus.len(), category));
        }
    }
    let cats = category_distribution(&corpus).map_err(|e| e.to_string())?;
    let ranked = cats.ranked();
    ensure(
        ranked == vec![("cs.CL", 8, 50.0), ("cs.AI", 4, 25.0), ("cs.CY", 3, 18.8), ("cs.SE", 1, 6.3)],
        || format!("synthetic categories {ranked:?}"),
    )?;
    Ok("200-document star report and category reports exact".into())
}

fn criterion_6() -> Check {
    let epoch = DateTime::from_timestamp(0, 0).unwrap();
    let page = parse_feed(common::THREE_FEED, epoch).map_err(|e| e.to_string())?;
    let r = &page.records;
    ensure(page.warnings.is_empty() && r.len() == 3, || "three clean records".into())?;
    let date = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).unwrap();
    let pinned = [
        ("2302.99001v2", "Pair Programming with ChatGPT: Productivity & Pitfalls in Code Review", vec!["cs.SE", "cs.HC"], date(2023, 2, 15)),
        ("2304.10513v1", "Why Does ChatGPT Fall Short in Providing Truthful Answers?", vec!["cs.CL", "cs.AI"], date(2023, 4, 20)),
        ("2305.18303v1", "", vec!["cs.CY", "cs.AI"], date(2023, 5, 29)),
    ];
    for (rec, (id, title, cats, submitted)) in r.iter().zip(pinned) {
        ensure(rec.arxiv_id == id, || format!("id {}", rec.arxiv_id))?;
        ensure(title.is_empty() || rec.title == title, || format!("title {:?}", rec.title))?;
        ensure(rec.categories == cats, || format!("{id} categories {:?}", rec.categories))?;
        ensure(rec.submitted == submitted, || format!("{id} submitted {}", rec.submitted))?;
        ensure(rec.fetched_at == epoch, || format!("{id} fetched_at"))?;
        ensure(!rec.abstract_text.contains('\n'), || format!("{id} abstract not unwrapped"))?;
    }
    ensure(
        r[1].abstract_text.starts_with("Recent advancements in Large Language Models, such as ChatGPT,")
            && r[1].abstract_text.ends_with("to answer questions more truthfully."),
        || "2304.10513v1 abstract".into(),
    )?;

    let page = parse_feed(MALFORMED_FEED, epoch).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = page.records.iter().map(|r| r.arxiv_id.as_str()).collect();
    ensure(ids == ["2302.99001v2", "2304.10513v1"], || format!("malformed feed kept {ids:?}"))?;
    ensure(page.warnings.len() == 1 && page.warnings[0].entry_index == 1, || {
        format!("warnings {:?}", page.warnings)
    })?;
    Ok("3 pinned records; malformed entry skipped with 1 warning".into())
}

fn criterion_7(command: Vec<String>) -> Check {
    let overall = ProcessClassifier::new(
        ModelSpec::new(DEFAULT_OVERALL_MODEL, Task::OverallSentiment, "main", 512),
        command.clone(),
    );
    let aspect = ProcessClassifier::new(
        ModelSpec::new(DEFAULT_ASPECT_MODEL, Task::AspectSentiment, "main", 512),
        command,
    );
    let records = parse_feed(common::THREE_FEED, DateTime::from_timestamp(0, 0).unwrap())
        .map_err(|e| e.to_string())?
        .records;
    let truthful = build_document(&records[1]).map_err(|e| e.to_string())?;
    let education = build_document(&records[2]).map_err(|e| e.to_string())?;

    let d1 = classify_overall(&truthful.text, &overall).map_err(|e| e.to_string())?;
    let reference = truthfulness_scores();
    for label in STAR_LABELS {
        let (got, want) = (d1.score(label).unwrap(), reference.score(label).unwrap());
        close(got, want, SCORE_TOL, &format!("truthfulness abstract {label}"))?;
    }
    ensure(top_label(&d1) == "3 stars", || format!("argmax {}", top_label(&d1)))?;
    let d2 = classify_overall(&education.text, &overall).map_err(|e| e.to_string())?;
    ensure(top_label(&d2) == "4 stars", || format!("argmax {}", top_label(&d2)))?;

    let a1 = score_terms(&truthful, &["truthfulness"], &aspect).map_err(|e| e.to_string())?;
    close(a1[0].distribution.score("Negative").unwrap(), 0.678, SCORE_TOL, "truthfulness Negative")?;
    let a2 = score_terms(&education, &["education", "learning"], &aspect).map_err(|e| e.to_string())?;
    close(a2[0].distribution.score("Positive").unwrap(), 0.527, SCORE_TOL, "education Positive")?;
    close(a2[1].distribution.score("Positive").unwrap(), 0.725, SCORE_TOL, "learning Positive")?;

    let f1 = detect_divergence(&d1, &a1).map_err(|e| e.to_string())?;
    let f2 = detect_divergence(&d2, &a2).map_err(|e| e.to_string())?;
    ensure(f1.iter().all(|f| f.divergent), || "truthfulness should diverge".into())?;
    ensure(f2.iter().all(|f| !f.divergent), || "education/learning should not diverge".into())?;
    Ok("model scores within 0.02 of the published values".into())
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = common::write_fixture_corpus(dir.path());
    let cfg = common::synthetic_config(dir.path(), 200);
    let mut snapshots = Vec::new();
    for (name, extra) in [("first", None), ("second", Some("--no-cache"))] {
        let out_dir = dir.path().join(name);
        let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
        args.extend(extra);
        args.extend(["run-all", "--corpus", corpus.to_str().unwrap()]);
        let out = common::run(&args);
        ensure(out.status.success(), || {
            format!("run-all failed: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        snapshots.push(common::snapshot(&out_dir));
    }
    ensure(snapshots[0].len() == 10, || format!("{} files", snapshots[0].len()))?;
    for (name, bytes) in &snapshots[0] {
        ensure(snapshots[1].get(name) == Some(bytes), || format!("{name} differs"))?;
    }
    Ok(format!("{} files identical across two runs", snapshots[0].len()))
}

fn run(f: fn() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Outcome::Pass(detail),
        Ok(Err(detail)) => Outcome::Fail(detail),
        Err(panic) => Outcome::Fail(
            panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()),
        ),
    }
}

fn main() {
    let started = std::time::Instant::now();
    let mut outcomes: Vec<(usize, &str, Outcome)> = vec![
        (1, "Shapley axioms on random games", run(criterion_1)),
        (2, "additive games are exact", run(criterion_2)),
        (3, "hierarchical efficiency", run(criterion_3)),
        (4, "cumulative probability", run(criterion_4)),
        (5, "aggregation percentages", run(criterion_5)),
        (6, "arXiv feed parsing", run(criterion_6)),
    ];
    let model_command: Option<Vec<String>> = std::env::var(MODEL_COMMAND_ENV)
        .ok()
        .map(|c| c.split_whitespace().map(String::from).collect::<Vec<_>>())
        .filter(|c| !c.is_empty());
    let seven = match model_command {
        Some(cmd) => match catch_unwind(AssertUnwindSafe(|| criterion_7(cmd))) {
            Ok(Ok(d)) => Outcome::Pass(d),
            Ok(Err(d)) => Outcome::Fail(d),
            Err(_) => Outcome::Fail("panicked".into()),
        },
        None => Outcome::Skip(format!("optional; set {MODEL_COMMAND_ENV} to run against real models")),
    };
    outcomes.push((7, "published model scores", seven));
    outcomes.push((8, "run-all determinism", run(criterion_8)));

    let mut failed = 0;
    for (n, name, outcome) in &outcomes {
        match outcome {
            Outcome::Pass(d) => println!("PASS criterion {n}: {name} ({d})"),
            Outcome::Skip(d) => println!("SKIP criterion {n}: {name} ({d})"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL criterion {n}: {name} ({d})");
            }
        }
    }
    println!("acceptance finished in {:.1}s", started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
