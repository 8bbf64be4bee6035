use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use proptest::prelude::*;

use super::*;
use crate::respond::{Answer, AnswerKind, AnswerProvenance};

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn doc(id: &str, title: &str, body: &str, published: NaiveDate) -> ArticleDoc {
    ArticleDoc {
        doc_id: id.into(),
        title: title.into(),
        body: body.into(),
        published,
        section: "Finance".into(),
        url: format!("https://example.com/{id}"),
    }
}

/// Textbook BM25 over raw strings: every document against every distinct
/// query word, with its own word splitting.
fn naive_bm25(docs: &[ArticleDoc], query: &str) -> Vec<(String, f64)> {
    let words = |s: &str| -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for ch in s.chars().chain(core::iter::once(' ')) {
            if ch.is_alphanumeric() {
                cur.push(ch);
            } else {
                if cur.chars().count() >= 2 {
                    out.push(cur.to_lowercase());
                }
                cur.clear();
            }
        }
        out
    };
    let doc_words: Vec<Vec<String>> = docs.iter().map(|d| words(&format!("{} {}", d.title, d.body))).collect();
    let n = docs.len() as f64;
    let avg = doc_words.iter().map(|w| w.len() as f64).sum::<f64>() / n;
    let q: BTreeSet<String> = words(query).into_iter().collect();
    let mut out = Vec::new();
    for (d, ws) in docs.iter().zip(&doc_words) {
        let mut score = 0.0;
        let mut any = false;
        for t in &q {
            let tf = ws.iter().filter(|w| *w == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            any = true;
            let df = doc_words.iter().filter(|w| w.contains(t)).count() as f64;
            let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
            score += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * ws.len() as f64 / avg));
        }
        if any {
            out.push((d.doc_id.clone(), score));
        }
    }
    out
}

#[test]
fn tokenizer_rules() {
    assert_eq!(tokenize("AI-driven Q3 growth, a 5% rise"), ["ai", "driven", "q3", "growth", "rise"]);
    assert!(tokenize("a b c ! ?").is_empty());
}

#[test]
fn index_statistics() {
    let docs = vec![
        doc("b", "Chips", "chip demand rose", date(2023, 1, 1)),
        doc("a", "Cars", "car demand fell sharply", date(2023, 1, 2)),
    ];
    let idx = index_corpus(&docs).unwrap();
    assert_eq!(idx.doc_count(), 2);
    assert_eq!(idx.postings("demand").len(), 2);
    assert_eq!(idx.docs[0].doc_id, "a");
    assert_eq!(idx.avg_doc_length, (5.0 + 4.0) / 2.0);
    assert_eq!(index_corpus(&docs).unwrap(), idx);
    let json = serde_json::to_string(&idx).unwrap();
    assert_eq!(serde_json::from_str::<CorpusIndex>(&json).unwrap(), idx);
}

#[test]
fn empty_and_duplicate() {
    let idx = index_corpus(&[]).unwrap();
    assert!(retrieve(&idx, "anything at all").is_empty());
    let d = doc("x", "t", "b", date(2020, 1, 1));
    assert_eq!(index_corpus(&[d.clone(), d]), Err(IndexError::DuplicateDocId("x".into())));
}

#[test]
fn unique_term_ranks_first_and_short_tokens_match_nothing() {
    let docs = vec![
        doc("a", "Markets", "stocks rallied", date(2023, 1, 1)),
        doc("b", "Markets", "stocks rallied on zyxquant news", date(2023, 1, 1)),
        doc("c", "Energy", "oil prices", date(2023, 1, 1)),
    ];
    let idx = index_corpus(&docs).unwrap();
    assert_eq!(retrieve(&idx, "zyxquant")[0].doc_id, "b");
    assert!(retrieve(&idx, "a b c d e").is_empty());
    let hits = retrieve(&idx, "stocks");
    assert_eq!(hits.iter().map(|h| h.rank).collect::<Vec<_>>(), [1, 2]);
}

#[test]
fn rerank_prefers_recent_among_equals() {
    let docs = vec![
        doc("old", "Same title", "same body text", date(2015, 6, 1)),
        doc("new", "Same title", "same body text", date(2025, 5, 31)),
    ];
    let idx = index_corpus(&docs).unwrap();
    let hits = retrieve(&idx, "same body");
    assert_eq!(hits[0].doc_id, "new");
    let hits = rerank(retrieve(&idx, "same body"), "same body", date(2025, 6, 1), &RerankWeights::default()).unwrap();
    assert_eq!(hits[0].doc_id, "new");
    assert!(hits[0].stage_scores.recency > hits[1].stage_scores.recency);
}

#[test]
fn rerank_single_hit_and_bad_weights() {
    let idx = index_corpus(&[doc("a", "Revenue grows", "revenue grows fast", date(2024, 6, 1))]).unwrap();
    let hits = rerank(retrieve(&idx, "revenue"), "revenue", date(2025, 6, 1), &RerankWeights::default()).unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].rank, 1);
    let expected = 0.6 + 0.3 * 0.5 + 0.1 * 0.5f64.powf(365.0 / 365.0);
    assert!((hits[0].score - expected).abs() < 1e-12);
    let bad = RerankWeights { bm25: 0.5, ..RerankWeights::default() };
    assert!(rerank(Vec::new(), "", date(2025, 1, 1), &bad).is_err());
}

fn hit(id: &str, score: f64) -> ReferenceHit {
    ReferenceHit {
        doc_id: id.into(),
        score,
        stage_scores: StageScores { bm25: score, title_overlap: 0.0, recency: 0.0 },
        rank: 1,
        title: String::new(),
        url: String::new(),
        published: date(2020, 1, 1),
    }
}

fn answer(kind: AnswerKind) -> Answer {
    Answer {
        kind,
        text: "text".into(),
        payload: None,
        citations: Vec::new(),
        boundary_note: None,
        rejection: None,
        provenance: AnswerProvenance::default(),
    }
}

#[test]
fn citation_threshold_and_cap() {
    let hits: Vec<_> = [0.9, 0.5, 0.3, 0.1].iter().enumerate().map(|(i, s)| hit(&i.to_string(), *s)).collect();
    assert_eq!(attach_references(answer(AnswerKind::Metric), &hits, "fp", 0.2, 3).citations.len(), 3);
    let low: Vec<_> = [0.19, 0.1].iter().map(|s| hit("x", *s)).collect();
    assert!(attach_references(answer(AnswerKind::Metric), &low, "fp", 0.2, 3).citations.is_empty());
    let a = attach_references(answer(AnswerKind::Persona), &hits, "fp", 0.2, 3);
    assert!(a.citations.is_empty());
    assert_eq!(a.provenance.index_fingerprint.as_deref(), Some("fp"));
}

const VOCAB: [&str; 12] = [
    "revenue", "profit", "chip", "energy", "oil", "bank", "rates", "growth", "ai", "cloud", "retail", "tariff",
];

fn corpus() -> impl Strategy<Value = Vec<ArticleDoc>> {
    let text = prop::collection::vec(prop::sample::select(VOCAB.to_vec()), 0..25).prop_map(|w| w.join(" "));
    prop::collection::vec((text.clone(), text, 0i64..4000), 1..20).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, (t, b, age))| {
                doc(&format!("d{i:02}"), &t, &b, date(2025, 1, 1) - chrono::Duration::days(age))
            })
            .collect()
    })
}

fn query() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB.to_vec()), 1..6).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn bm25_matches_naive(docs in corpus(), q in query()) {
        let idx = index_corpus(&docs).unwrap();
        let hits = retrieve_n(&idx, &q, 1000);
        let mut naive = naive_bm25(&docs, &q);
        prop_assert_eq!(hits.len(), naive.len());
        naive.sort_by(|a, b| a.0.cmp(&b.0));
        for h in &hits {
            let (_, s) = naive.iter().find(|(id, _)| *id == h.doc_id).unwrap();
            prop_assert!((h.stage_scores.bm25 - s).abs() < 1e-9);
        }
        for w in hits.windows(2) {
            prop_assert!(w[0].stage_scores.bm25 > w[1].stage_scores.bm25
                || (w[0].stage_scores.bm25 == w[1].stage_scores.bm25 && w[0].doc_id < w[1].doc_id));
        }
    }

    #[test]
    fn rerank_is_a_permutation(docs in corpus(), q in query()) {
        let idx = index_corpus(&docs).unwrap();
        let hits = retrieve(&idx, &q);
        let before: BTreeSet<String> = hits.iter().map(|h| h.doc_id.clone()).collect();
        let out = rerank(hits.clone(), &q, date(2025, 6, 1), &RerankWeights::default()).unwrap();
        let after: BTreeSet<String> = out.iter().map(|h| h.doc_id.clone()).collect();
        prop_assert_eq!(out.len(), hits.len());
        prop_assert_eq!(before, after);
        prop_assert!(out.iter().enumerate().all(|(i, h)| h.rank as usize == i + 1));
        prop_assert!(out.iter().all(|h| (0.0..=1.0 + 1e-12).contains(&h.score)));
        prop_assert!(out.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn unrelated_document_keeps_hit_set(docs in corpus(), q in query()) {
        let idx = index_corpus(&docs).unwrap();
        let before: BTreeSet<String> = retrieve_n(&idx, &q, 1000).into_iter().map(|h| h.doc_id).collect();
        let mut grown = docs.clone();
        grown.push(doc("zz", "Weather", "sunny skies tomorrow", date(2024, 1, 1)));
        let idx2 = index_corpus(&grown).unwrap();
        let after: BTreeSet<String> = retrieve_n(&idx2, &q, 1000).into_iter().map(|h| h.doc_id).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn unrelated_document_of_average_length_keeps_order(docs in equal_length_corpus(), term in prop::sample::select(VOCAB.to_vec())) {
        let idx = index_corpus(&docs).unwrap();
        let order: Vec<String> = retrieve_n(&idx, term, 1000).into_iter().map(|h| h.doc_id).collect();
        let mut grown = docs.clone();
        let filler = vec!["sunny"; LEN].join(" ");
        grown.push(doc("zz", "", &filler, date(2024, 1, 1)));
        let idx2 = index_corpus(&grown).unwrap();
        prop_assert_eq!(idx2.avg_doc_length, idx.avg_doc_length);
        let order2: Vec<String> = retrieve_n(&idx2, term, 1000).into_iter().map(|h| h.doc_id).collect();
        prop_assert_eq!(order, order2);
    }
}

const LEN: usize = 30;

/// Every document is exactly `LEN` tokens long.
fn equal_length_corpus() -> impl Strategy<Value = Vec<ArticleDoc>> {
    let words = prop::collection::vec(prop::sample::select(VOCAB.to_vec()), 0..LEN);
    prop::collection::vec(words, 1..20).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, mut w)| {
                w.resize(LEN, "padding");
                doc(&format!("d{i:02}"), "", &w.join(" "), date(2024, 1, 1))
            })
            .collect()
    })
}
