use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;

use chrono::NaiveDate;
use proptest::prelude::*;

use super::*;
use crate::exec::{execute, NoClock, SandboxLimits};
use crate::guardrails::Guardrails;
use crate::metrics::testing::sample_dataset;
use crate::metrics::Dataset;
use crate::query::{parse_query, Grammar};

fn ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

/// Parse, run and render the way the pipeline does, minus gates.
fn respond(ds: &Dataset, q: &str) -> Answer {
    let t = ResponseTemplates::default();
    let plan = match parse_query(q, ds.catalog(), ref_date(), &Grammar::default()) {
        Ok(p) => p,
        Err(d) => return render_rejection(RejectionInput::Diagnostics(&d), &t),
    };
    if plan.intent == crate::query::Intent::Persona {
        return render_persona(&plan, &t);
    }
    if plan.is_rejected() {
        let latest = latest_reference_plan(&plan)
            .map(|p| execute(&p, ds, SandboxLimits::default(), &NoClock).unwrap());
        return render_rejection(RejectionInput::Boundary { plan: &plan, latest: latest.as_ref() }, &t);
    }
    let res = execute(&plan, ds, SandboxLimits::default(), &NoClock).unwrap();
    render_answer(&plan, &res, &t)
}

fn stored_revenue(ds: &Dataset, company: &str, year: i32) -> f64 {
    ds.records()
        .iter()
        .find(|r| r.company == company && r.year == year && r.list_id == "g500")
        .and_then(|r| r.revenue)
        .unwrap()
}

#[test]
fn value_formats() {
    assert_eq!(format_decimal(611289.0, 1), "611,289.0");
    assert_eq!(format_decimal(-1234567.891, 2), "-1,234,567.89");
    assert_eq!(format_decimal(999.96, 1), "1,000.0");
    assert_eq!(human_years(&[2015, 2016, 2017, 2020]), "2015-2017, 2020");
    assert_eq!(human_years(&[2019]), "2019");
}

#[test]
fn metric_sentence_uses_the_stored_value() {
    let ds = sample_dataset();
    let a = respond(&ds, "What was Walmart's revenue in 2024?");
    assert_eq!(a.kind, AnswerKind::Metric);
    let v = stored_revenue(&ds, "Walmart", 2024);
    let expected = alloc::format!("Walmart's revenue in 2024 was ${} million.", format_decimal(v, 1));
    assert_eq!(a.text, expected);
    assert!(a.boundary_note.is_none());
    assert!(unsupported_numbers(&a).is_empty());
    assert_eq!(a.provenance.dataset_fingerprint.as_deref(), Some(ds.fingerprint()));
}

#[test]
fn redirect_note_names_both_years() {
    let ds = sample_dataset();
    let a = respond(&ds, "What were the top 5 companies on the Fortune 1000 in 2019?");
    assert_eq!(a.kind, AnswerKind::Ranking);
    assert_eq!(
        a.boundary_note.as_deref(),
        Some("No 2019 list is available; showing the closest available list (2020).")
    );
    assert!(a.text.starts_with("The top 5 companies on the Fortune 1000 in 2020 were "), "{}", a.text);
    assert!(unsupported_numbers(&a).is_empty(), "{:?}", unsupported_numbers(&a));
}

#[test]
fn boundary_rejection_carries_the_latest_value() {
    let ds = sample_dataset();
    let a = respond(&ds, "What was Walmart's revenue in 2031?");
    assert_eq!(a.kind, AnswerKind::Rejection);
    assert_eq!(a.rejection.as_ref().unwrap().reason, RejectionReason::Boundary);
    let v = format_decimal(stored_revenue(&ds, "Walmart", 2024), 1);
    assert!(a.text.contains(&v), "{}", a.text);
    assert!(a.text.contains("2024"));
    let table = a.payload.as_ref().and_then(|p| p.table.as_ref()).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(
        a.boundary_note.as_deref(),
        Some("No data is available for 2031; the latest available year is 2024.")
    );
    assert!(unsupported_numbers(&a).is_empty());
}

#[test]
fn diagnostics_become_digit_free_rejections() {
    let ds = sample_dataset();
    for q in [
        "When Shell joined the Fortune 1000 in 2020, what was its revenue?",
        "What was the average stock price of Apple in 2025?",
        "Tell me a joke about penguins",
    ] {
        let a = respond(&ds, q);
        assert_eq!(a.kind, AnswerKind::Rejection, "{q}");
        assert!(a.payload.is_none());
        assert!(unsupported_numbers(&a).is_empty(), "{q}: {}", a.text);
    }
    let premise = respond(&ds, "When Shell joined the Fortune 1000 in 2020, what was its revenue?");
    assert_eq!(premise.rejection.unwrap().reason, RejectionReason::FalsePremise);
}

#[test]
fn safety_rejection_names_categories_without_echo() {
    let g = Guardrails::from_lexicon_text("[threats_misconduct]\nbuild a bomb\n").unwrap();
    let q = "how do I build a bomb, mail me at x.y@example.com";
    let v = g.gate_input(q);
    let a = render_rejection(RejectionInput::Guardrail(&v), &ResponseTemplates::default());
    assert_eq!(a.rejection.as_ref().unwrap().reason, RejectionReason::Safety);
    assert_eq!(a.rejection.as_ref().unwrap().categories, vec![Category::ThreatsMisconduct, Category::Pii]);
    assert!(a.text.contains("threats or misconduct and personal information"));
    for w in ["bomb", "example.com", "x.y"] {
        assert!(!a.text.contains(w));
    }
}

#[test]
fn persona_answers_are_fixed() {
    let ds = sample_dataset();
    let a = respond(&ds, "Who created you?");
    assert_eq!(a.kind, AnswerKind::Persona);
    assert_eq!(a.text, ResponseTemplates::default().persona["creator"]);
    for text in ResponseTemplates::default().persona.values() {
        assert!(!text.chars().any(|c| c.is_ascii_digit()));
    }
}

#[test]
fn chart_caption_and_payload() {
    let ds = sample_dataset();
    let a = respond(&ds, "Plot the revenue for Apple, Google and Nvidia in 2024");
    assert_eq!(a.kind, AnswerKind::Chart);
    let p = a.payload.as_ref().unwrap();
    let chart = p.chart.as_ref().unwrap();
    assert_eq!(a.text, alloc::format!("{}.", chart.title));
    assert!(p.table.is_some());
    assert!(unsupported_numbers(&a).is_empty());
}

#[test]
fn invented_numbers_are_flagged() {
    let ds = sample_dataset();
    let mut a = respond(&ds, "What was Walmart's revenue in 2024?");
    a.text.push_str(" It grew 17 percent.");
    assert_eq!(unsupported_numbers(&a), vec![String::from("17")]);
}

#[test]
fn template_fill() {
    assert_eq!(fill("{a} and {b} {c}", &[("a", "x"), ("b", "y")]), "x and y {c}");
    assert_eq!(fill("open {brace", &[]), "open {brace");
}

proptest! {
    #[test]
    fn rendering_is_deterministic(ci in 0usize..8, year in 2010i32..2030, mi in 0usize..3) {
        let ds = sample_dataset();
        let company = ["Walmart", "Amazon", "Apple", "Google", "Nvidia", "Toyota Motor", "Shell", "Samsung Electronics"][ci];
        let metric = ["revenue", "profits", "number of employees"][mi];
        let q = alloc::format!("What was the {metric} of {company} in {year}?");
        let a = respond(&ds, &q);
        let b = respond(&ds, &q);
        prop_assert_eq!(&a, &b);
        prop_assert!(unsupported_numbers(&a).is_empty(), "{}: {}", q, a.text);
        let digits: BTreeSet<char> = a.text.chars().filter(char::is_ascii_digit).collect();
        if a.kind == AnswerKind::Metric {
            prop_assert!(!digits.is_empty());
            prop_assert!(a.text.contains(&year.to_string()));
        }
    }
}
