use absa_xai::aspects::{
    detect_divergence, extract_aspects, normalized_terms, AspectParams, AspectSentiment,
};
use absa_xai::corpus::{build_document, parse_feed, AbstractDocument};
use absa_xai::explain::{word_spans, Attribution, Estimator, SpanValue};
use absa_xai::inference::{LabelDistribution, Polarity, POLARITY_LABELS, STAR_LABELS};
use chrono::DateTime;
use proptest::prelude::*;

fn fixture_doc(index: usize) -> AbstractDocument {
    let page = parse_feed(include_str!("fixtures/arxiv_three.xml"), DateTime::from_timestamp(0, 0).unwrap()).unwrap();
    build_document(&page.records[index]).unwrap()
}

fn plain_doc(text: &str) -> AbstractDocument {
    let sentences = absa_xai::corpus::segment_sentences(text);
    AbstractDocument {
        source_id: "doc".into(),
        text: text.into(),
        sentence_count: sentences.len(),
        sentences,
        char_count: text.chars().count(),
        warnings: Vec::new(),
    }
}

fn word_attribution(doc: &AbstractDocument, phi: impl Fn(usize, &str) -> f64) -> Attribution {
    let spans = word_spans(&doc.text);
    Attribution {
        doc_id: doc.source_id.clone(),
        target_label: "3 stars".into(),
        model_id: "fixture".into(),
        estimator: Estimator::Exact,
        seed: None,
        sample_count: 0,
        base_value: 0.0,
        full_value: 0.0,
        spans: spans
            .iter()
            .enumerate()
            .map(|(i, s)| SpanValue {
                span: *s,
                phi: phi(i, s.slice(&doc.text).unwrap()),
                stderr: 0.0,
            })
            .collect(),
    }
}

#[test]
fn truthfulness_surfaces_from_concentrated_attribution() {
    let doc = fixture_doc(1);
    let a = word_attribution(&doc, |i, w| {
        if w.to_lowercase().contains("truthful") {
            0.05
        } else if w.starts_with("answers") {
            0.03
        } else {
            0.002 * ((i % 5) as f64 - 2.0)
        }
    });
    let got = extract_aspects(&doc, &a, &AspectParams::default()).unwrap();
    let top3: Vec<&str> = got.iter().take(3).map(|c| c.term.as_str()).collect();
    assert!(top3.contains(&"truthfulness"), "{top3:?}");
}

fn dist(labels: &[&str], top: &str) -> LabelDistribution {
    let pairs: Vec<(&str, f64)> = labels
        .iter()
        .map(|&l| (l, if l == top { 0.9 } else { 0.1 / (labels.len() - 1) as f64 }))
        .collect();
    LabelDistribution::from_pairs(labels, &pairs, "fixture").unwrap()
}

fn aspect(doc: &str, term: &str, polarity: Polarity) -> AspectSentiment {
    AspectSentiment {
        doc_id: doc.into(),
        term: term.into(),
        distribution: dist(&POLARITY_LABELS, polarity.label()),
        polarity,
    }
}

#[test]
fn example_divergence_flags() {
    let neutral = detect_divergence(
        &dist(&STAR_LABELS, "3 stars"),
        &[aspect("2304.10513v1", "truthfulness", Polarity::Negative)],
    )
    .unwrap();
    assert!(neutral[0].divergent);
    let positive = detect_divergence(
        &dist(&STAR_LABELS, "4 stars"),
        &[
            aspect("2305.18303v1", "education", Polarity::Positive),
            aspect("2305.18303v1", "learning", Polarity::Positive),
        ],
    )
    .unwrap();
    assert!(positive.iter().all(|f| !f.divergent));
}

const WORDS: [&str; 12] = [
    "battery", "screen", "latency", "teacher", "privacy", "accuracy", "bias", "tutoring",
    "ethic", "reasoning", "hallucination", "assessment",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extracted_terms_occur_in_the_text(
        picks in prop::collection::vec((0usize..WORDS.len(), -1.0f64..1.0), 1..20),
        tau in 0.0f64..=1.0,
        max in 0usize..8,
    ) {
        let text = picks.iter().map(|(w, _)| WORDS[*w]).collect::<Vec<_>>().join(" the ");
        let doc = plain_doc(&text);
        let words = word_spans(&text);
        let phis: Vec<f64> = words
            .iter()
            .map(|s| {
                let w = s.slice(&text).unwrap();
                picks.iter().find(|(i, _)| WORDS[*i] == w).map_or(0.0, |p| p.1)
            })
            .collect();
        let a = word_attribution(&doc, |i, _| phis[i]);
        let params = AspectParams { tau_quantile: tau, max_candidates: max };
        let got = extract_aspects(&doc, &a, &params).unwrap();
        prop_assert!(got.len() <= max);
        let norm = normalized_terms(&text).join(" ");
        for (r, c) in got.iter().enumerate() {
            prop_assert_eq!(c.rank, r + 1);
            prop_assert!(c.salience > 0.0);
            prop_assert!(c.term.chars().count() >= 3);
            let padded = format!(" {} ", norm);
            let needle = format!(" {} ", c.term);
            prop_assert!(padded.contains(&needle), "{} not in text", c.term);
        }
        for pair in got.windows(2) {
            prop_assert!(pair[0].salience > pair[1].salience
                || (pair[0].salience == pair[1].salience && pair[0].first_position() <= pair[1].first_position()));
        }
    }

    #[test]
    fn raising_phi_never_lowers_relative_rank(
        phis in prop::collection::vec(0.01f64..1.0, WORDS.len()),
        target in 0usize..WORDS.len(),
        bump in 0.0f64..1.0,
    ) {
        // Distinct single-occurrence words separated by punctuation: no bigrams.
        let text = WORDS.join(", ");
        let doc = plain_doc(&text);
        let params = AspectParams { tau_quantile: 0.0, max_candidates: WORDS.len() };
        let before = extract_aspects(&doc, &word_attribution(&doc, |i, _| phis[i]), &params).unwrap();
        let after = extract_aspects(
            &doc,
            &word_attribution(&doc, |i, _| if i == target { phis[i] + bump } else { phis[i] }),
            &params,
        )
        .unwrap();
        let rank = |list: &[absa_xai::aspects::AspectCandidate], term: &str| {
            list.iter().position(|c| c.term == term)
        };
        let t = WORDS[target];
        for other in WORDS.iter().filter(|w| **w != t) {
            if let (Some(tb), Some(ob), Some(ta), Some(oa)) =
                (rank(&before, t), rank(&before, other), rank(&after, t), rank(&after, other))
            {
                if tb < ob {
                    prop_assert!(ta < oa, "{t} fell behind {other}");
                }
            }
        }
    }

    #[test]
    fn divergence_commutes_with_permutation(
        pols in prop::collection::vec(0usize..3, 0..8),
        star in 0usize..5,
        rot in 0usize..8,
    ) {
        let all = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];
        let results: Vec<AspectSentiment> = pols
            .iter()
            .enumerate()
            .map(|(i, p)| aspect("d", &format!("term{i}"), all[*p]))
            .collect();
        let overall = dist(&STAR_LABELS, STAR_LABELS[star]);
        let mut rotated = results.clone();
        if !rotated.is_empty() {
            let k = rot % rotated.len();
            rotated.rotate_left(k);
        }
        let mut a = detect_divergence(&overall, &results).unwrap();
        let b = detect_divergence(&overall, &rotated).unwrap();
        if !a.is_empty() {
            let k = rot % a.len();
            a.rotate_left(k);
        }
        prop_assert_eq!(a, b);
    }
}
