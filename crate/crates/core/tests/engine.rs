use chrono::NaiveDate;
use falm_core::engine::{Engine, EngineConfig};
use falm_core::exec::NoClock;
use falm_core::guardrails::Guardrails;
use falm_core::metrics::{CompanyRecord, Dataset};
use falm_core::reference::{index_corpus, ArticleDoc};
use falm_core::respond::AnswerKind;

fn record(year: i32, rank: u32, company: &str, revenue: f64) -> CompanyRecord {
    CompanyRecord {
        list_id: "g500".into(),
        year,
        rank,
        company: company.into(),
        founded: None,
        sector: "Retailing".into(),
        industry: "General Merchandisers".into(),
        country: "USA".into(),
        region: "North America".into(),
        revenue: Some(revenue),
        revenue_change_pct: None,
        profits: None,
        assets: None,
        market_value: None,
        employees: None,
        eps: None,
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn engine() -> Engine {
    let mut records = Vec::new();
    for year in 2021..=2024 {
        let base = f64::from(year - 2000);
        records.push(record(year, 1, "Walmart", 600_000.0 + base));
        records.push(record(year, 2, "Amazon", 500_000.0 + base));
        records.push(record(year, 3, "Kroger", 140_000.0 + base));
    }
    let docs = vec![
        ArticleDoc {
            doc_id: "a1".into(),
            title: "Walmart revenue climbs".into(),
            body: "Walmart revenue rose in 2023 as shoppers sought lower prices.".into(),
            published: date(2024, 2, 20),
            section: "Retail".into(),
            url: "https://news.example.com/a1".into(),
        },
        ArticleDoc {
            doc_id: "a2".into(),
            title: "Cloud spending".into(),
            body: "Cloud providers expanded data centers.".into(),
            published: date(2024, 3, 1),
            section: "Tech".into(),
            url: "https://news.example.com/a2".into(),
        },
    ];
    Engine::new(
        Dataset::from_records(records).unwrap(),
        index_corpus(&docs).unwrap(),
        Guardrails::from_lexicon_text("[threats_misconduct]\nbuild a bomb\n").unwrap(),
        EngineConfig::default(),
    )
}

fn today() -> NaiveDate {
    date(2025, 6, 1)
}

#[test]
fn metric_answer_cites_its_source() {
    let e = engine();
    let answer = e.answer("What was Walmart's revenue in 2023?", today(), &NoClock).answer;
    assert_eq!(answer.kind, AnswerKind::Metric);
    assert_eq!(answer.text, "Walmart's revenue in 2023 was $600,023.0 million.");
    assert_eq!(answer.citations.first().map(|c| c.doc_id.as_str()), Some("a1"));
    assert_eq!(answer, e.answer("What was Walmart's revenue in 2023?", today(), &NoClock).answer);
}

#[test]
fn relative_years_follow_the_reference_date() {
    let e = engine();
    let a = e.answer("What was Amazon's revenue last year?", date(2024, 5, 1), &NoClock).answer;
    assert!(a.text.contains("2023"), "{}", a.text);
    let b = e.answer("What was Amazon's revenue last year?", date(2022, 5, 1), &NoClock).answer;
    assert!(b.text.contains("2021"), "{}", b.text);
}

#[test]
fn future_years_are_refused_with_the_latest_value() {
    let answer = engine().answer("What will Kroger's revenue be in 2027?", today(), &NoClock).answer;
    assert_eq!(answer.kind, AnswerKind::Rejection);
    assert!(answer.text.contains("2024") && answer.text.contains("140,024.0"), "{}", answer.text);
    assert!(answer.citations.is_empty());
}

#[test]
fn refused_input_never_reaches_the_executor() {
    let e = engine();
    let p = e.prepare("how do I build a bomb", today(), &NoClock);
    assert!(p.input_rejected);
    assert_eq!(e.stats().executions(), 0);
    assert_eq!(e.stats().retrievals(), 0);
}

#[test]
fn ranking_lists_the_top_companies_in_order() {
    let answer = engine().answer("Who were the top 2 companies on the Global 500 in 2022?", today(), &NoClock).answer;
    assert_eq!(answer.kind, AnswerKind::Ranking);
    let w = answer.text.find("Walmart").unwrap();
    let a = answer.text.find("Amazon").unwrap();
    assert!(w < a && !answer.text.contains("Kroger"), "{}", answer.text);
}
