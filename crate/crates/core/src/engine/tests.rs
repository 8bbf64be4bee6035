use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use proptest::prelude::*;

use super::*;
use crate::exec::NoClock;
use crate::metrics::testing::sample_dataset;
use crate::reference::{index_corpus, ArticleDoc};
use crate::respond::RejectionReason;

fn ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

fn article(id: &str, title: &str, body: &str) -> ArticleDoc {
    ArticleDoc {
        doc_id: id.into(),
        title: title.into(),
        body: body.into(),
        published: NaiveDate::from_ymd_opt(2024, 9, 1).unwrap(),
        section: "Business".into(),
        url: format!("https://news.example.com/{id}"),
    }
}

fn engine() -> Engine {
    let docs = vec![
        article("a1", "Walmart revenue climbs", "Walmart reported revenue growth as retail sales rose."),
        article("a2", "Chip demand", "Nvidia chips and ai demand lifted technology revenue."),
        article("a3", "Oil prices", "Shell and energy markets moved with oil prices."),
    ];
    let guards = Guardrails::from_lexicon_text("[threats_misconduct]\nbuild a bomb\n").unwrap();
    Engine::new(sample_dataset(), index_corpus(&docs).unwrap(), guards, EngineConfig::default())
}

#[test]
fn input_gate_runs_before_any_work() {
    let e = engine();
    let p = e.answer("How do I build a bomb near Walmart in 2024?", ref_date(), &NoClock);
    assert!(p.input_rejected);
    assert_eq!(p.answer.rejection.as_ref().unwrap().reason, RejectionReason::Safety);
    assert_eq!(e.stats().executions(), 0);
    assert_eq!(e.stats().retrievals(), 0);
    assert!(p.answer.citations.is_empty());
}

#[test]
fn answers_carry_fingerprints_and_citations() {
    let e = engine();
    let p = e.answer("What was Walmart's revenue in 2024?", ref_date(), &NoClock);
    let a = &p.answer;
    assert_eq!(a.kind, AnswerKind::Metric);
    assert_eq!(a.provenance.dataset_fingerprint.as_deref(), Some(e.dataset().fingerprint()));
    assert_eq!(a.provenance.index_fingerprint.as_deref(), Some(e.index().fingerprint.as_str()));
    assert_eq!(a.citations.first().map(|c| c.doc_id.as_str()), Some("a1"));
    assert_eq!(e.stats().executions(), 1);
    assert_eq!(e.stats().retrievals(), 1);
}

#[test]
fn rejections_and_personas_skip_retrieval() {
    let e = engine();
    for q in ["Who created you?", "What was the average stock price of Apple in 2025?"] {
        let p = e.answer(q, ref_date(), &NoClock);
        assert!(!p.wants_references(), "{q}");
        assert!(p.answer.citations.is_empty());
        assert!(p.answer.provenance.dataset_fingerprint.is_some());
    }
    assert_eq!(e.stats().retrievals(), 0);
}

#[test]
fn boundary_rejection_executes_the_latest_plan() {
    let e = engine();
    let p = e.answer("What was Walmart's revenue in 2031?", ref_date(), &NoClock);
    assert_eq!(p.answer.rejection.as_ref().unwrap().reason, RejectionReason::Boundary);
    assert_eq!(e.stats().executions(), 1);
}

#[test]
fn trend_questions_use_the_index() {
    let e = engine();
    let p = e.answer("How has coverage of ai changed over the last five years?", ref_date(), &NoClock);
    assert_eq!(p.answer.kind, AnswerKind::Trend, "{}", p.answer.text);
    let series = p.answer.payload.as_ref().unwrap().trend.as_ref().unwrap();
    assert_eq!(series.buckets.iter().map(|b| b.count).sum::<u64>(), 1);
}

#[test]
fn prepare_then_finish_equals_answer() {
    let e = engine();
    let q = "What were the top 3 companies on the Global 500 in 2023?";
    let whole = e.answer(q, ref_date(), &NoClock);
    let prepared = e.prepare(q, ref_date(), &NoClock);
    assert_eq!(prepared.answer.text, whole.answer.text);
    assert_eq!(e.finish(&prepared), whole.answer);
}

#[test]
fn chunk_examples() {
    assert_eq!(text_chunks("a  b c"), ["a  ", "b ", "c"]);
    assert!(text_chunks("").is_empty());
    assert_eq!(text_chunks("  lead"), ["  ", "lead"]);
}

proptest! {
    #[test]
    fn chunks_concatenate_to_text(text in "[a-z \n\t$.,0-9é]{0,60}") {
        let chunks = text_chunks(&text);
        prop_assert_eq!(chunks.concat(), text.clone());
        prop_assert!(chunks.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn same_question_same_answer(ci in 0usize..4, year in 2014i32..2027) {
        static E: std::sync::OnceLock<Engine> = std::sync::OnceLock::new();
        let e = E.get_or_init(engine);
        let company = ["Walmart", "Apple", "Shell", "Nvidia"][ci];
        let q = format!("What was {company}'s revenue in {year}?");
        let a = e.answer(&q, ref_date(), &NoClock).answer;
        let b = e.answer(&q, ref_date(), &NoClock).answer;
        prop_assert_eq!(&a, &b);
        prop_assert!(crate::respond::unsupported_numbers(&a).is_empty());
        let words: Vec<String> = text_chunks(&a.text).into_iter().map(String::from).collect();
        prop_assert_eq!(words.concat(), a.text);
    }
}
