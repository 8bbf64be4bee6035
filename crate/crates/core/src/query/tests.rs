use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use proptest::prelude::*;

use super::*;
use crate::metrics::testing::sample_dataset;
use crate::metrics::Metric;
use crate::temporal::{Basis, BoundaryKind};

fn ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

fn parse(text: &str) -> Result<QueryPlan, ParseDiagnostics> {
    let ds = sample_dataset();
    parse_query(text, ds.catalog(), ref_date(), &Grammar::default())
}

fn canon(text: &str) -> String {
    match parse(text) {
        Ok(p) => canonical_form(&p),
        Err(d) => panic!("{text}: {d}"),
    }
}

#[test]
fn walmart_revenue() {
    let p = parse("What was Walmart's revenue in 2024?").unwrap();
    assert_eq!(p.intent, Intent::MetricQa);
    assert_eq!(p.companies, vec![String::from("Walmart")]);
    assert_eq!(p.metrics, vec![Metric::Revenue]);
    assert_eq!(p.time.years, vec![2024]);
    assert_eq!(p.boundary.kind, BoundaryKind::InRange);
    assert_eq!(canonical_form(&p), "metric company=Walmart metric=revenue years=2024");
}

#[test]
fn stock_price_is_out_of_domain() {
    let d = parse("What was the average stock price of Apple in 2025?").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::OutOfDomain);
    assert!(d.message.contains("stock price"));
    assert!(!d.suggestions.is_empty());
}

#[test]
fn scatter_of_top_ten() {
    let p = parse(
        "Compare the revenue and the number of employees for the top 10 companies on the Fortune 1000 list",
    )
    .unwrap();
    assert_eq!(p.chart_type, Some(ChartType::Scatter));
    assert_eq!(p.metrics, vec![Metric::Revenue, Metric::Employees]);
    assert_eq!(p.top_k, Some(10));
    assert_eq!(p.list_id.as_deref(), Some("f1000"));
    assert_eq!(p.time.years, vec![2024]);
    assert_eq!(p.time.basis, Basis::DefaultedToLatest);
    assert_eq!(
        canonical_form(&p),
        "chart scatter list=f1000 metrics=revenue,employees top=10 years=2024 basis=latest"
    );
}

#[test]
fn bar_and_line_examples() {
    assert_eq!(
        canon("Plot the revenue for Apple, Google and Nvidia in 2024"),
        "chart bar list=g500 metrics=revenue companies=Apple,Google,Nvidia years=2024"
    );
    assert_eq!(
        canon("Show me the revenue for Apple, Google and Nvidia since 2014"),
        "chart line list=g500 metrics=revenue companies=Apple,Google,Nvidia years=2014..2024 effective=2015..2024"
    );
    assert_eq!(
        canon("Plot the revenue for Nvidia, Google and Apple in 2024"),
        canon("Plot the revenue for Apple, Google and Nvidia in 2024")
    );
}

#[test]
fn metric_year_outside_coverage_is_rejected() {
    let p = parse("What was Walmart's revenue in 2031?").unwrap();
    assert_eq!(p.boundary.kind, BoundaryKind::Reject);
    assert_eq!(p.boundary.latest_available, 2024);
    assert_eq!(canonical_form(&p), "metric company=Walmart metric=revenue years=2031 reject latest=2024");
}

#[test]
fn ranking_redirects_to_closest_year() {
    let p = parse("What were the top 5 companies on the Fortune 1000 in 2019?").unwrap();
    assert_eq!(p.intent, Intent::RankingQa);
    assert_eq!(p.boundary.kind, BoundaryKind::Redirect);
    assert_eq!(p.boundary.effective_years, vec![2020]);
    assert_eq!(canonical_form(&p), "ranking list=f1000 metric=rank top=5 years=2019 redirect=2020");
}

#[test]
fn ranking_forms() {
    assert_eq!(canon("Which company topped the Global 500 in 2020?"), "ranking list=g500 metric=rank top=1 years=2020");
    assert_eq!(
        canon("List the 3 largest companies by revenue in 2018"),
        "ranking list=g500 metric=revenue top=3 years=2018"
    );
    assert_eq!(canon("Top 10 of the Global 500 in 2022"), "ranking list=g500 metric=rank top=10 years=2022");
}

#[test]
fn relative_year_uses_reference_date() {
    assert_eq!(canon("What was Apple's revenue last year?"), "metric company=Apple metric=revenue years=2024");
}

#[test]
fn grouped_chart() {
    assert_eq!(
        canon("Plot the total revenue by sector in 2023"),
        "chart bar list=g500 metrics=revenue group=sector:sum years=2023"
    );
    assert_eq!(
        canon("Chart the number of companies per country in 2020"),
        "chart bar list=g500 metrics=rank group=country:count years=2020"
    );
}

#[test]
fn fuzzy_and_unknown_companies() {
    assert_eq!(canon("What was Nvidea's revenue in 2020?"), "metric company=Nvidia metric=revenue years=2020");
    let d = parse("What was Zzzz Industries' revenue in 2020?").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::UnknownEntity);
    assert_eq!(d.suggestions.len(), 3);
}

#[test]
fn trend_queries() {
    assert_eq!(
        canon("How has AI evolved in the last five years?"),
        "trend topic=ai scale=year from=2021-01-01 to=2025-12-31"
    );
    assert_eq!(
        canon("What was Fortune's view on inflation in April 2024?"),
        "trend topic=inflation scale=month from=2024-04-01 to=2024-04-30"
    );
    assert_eq!(
        canon("How has coverage of supply chains shifted quarterly since 2022?"),
        "trend topic=chains,supply scale=quarter from=2022-01-01 to=2025-12-31"
    );
}

#[test]
fn persona() {
    assert_eq!(
        canon("Are there any philosophical principles embedded in your programming?"),
        "persona key=principles"
    );
}

#[test]
fn false_premise_is_corrected() {
    let d = parse("When Shell joined the Fortune 1000 in 2020, what was its revenue?").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::BoundaryReject);
}

#[test]
fn diagnostics_for_bad_input() {
    assert_eq!(parse("").unwrap_err().kind, DiagnosticKind::OutOfGrammar);
    assert_eq!(parse("?!").unwrap_err().kind, DiagnosticKind::OutOfGrammar);
    assert_eq!(parse("Revenue of Apple from 2024 to 2020").unwrap_err().kind, DiagnosticKind::OutOfGrammar);
    assert_eq!(parse("Plot the top 500 companies by revenue").unwrap_err().kind, DiagnosticKind::OutOfGrammar);
}

#[test]
fn canonical_round_trip_examples() {
    let ds = sample_dataset();
    for text in [
        "What was Walmart's revenue in 2024?",
        "What was Walmart's revenue in 2031?",
        "What were the top 5 companies on the Fortune 1000 in 2019?",
        "Show me the revenue for Apple, Google and Nvidia since 2014",
        "Plot the total revenue by sector in 2023",
        "How has AI evolved in the last five years?",
        "Are there any philosophical principles embedded in your programming?",
        "Compare the revenue and the number of employees for the top 10 companies on the Fortune 1000 list",
    ] {
        let plan = parse(text).unwrap();
        let s = canonical_form(&plan);
        let back = parse_canonical(&s, ds.catalog(), ref_date()).unwrap();
        assert_eq!(back, plan, "{s}");
    }
}

fn words() -> impl Strategy<Value = String> {
    let vocab: Vec<&str> = vec![
        "plot", "revenue", "of", "Apple", "Walmart", "in", "2020", "since", "top", "10", "Global",
        "500", "Fortune", "1000", "by", "sector", "last", "year", "employees", "and", "trend", "AI",
        "who", "are", "you", "stock", "price", "-", "2031", "from", "to", "'s", "?", "scatter",
        "profits", "average", "per", "country", "Zzz", "ranking", "show",
    ];
    prop::collection::vec(prop::sample::select(vocab), 0..12).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn parse_is_total_and_plans_are_valid(text in words()) {
        if let Ok(plan) = parse(&text) {
            prop_assert!(plan.validate().is_ok());
            let ds = sample_dataset();
            let back = parse_canonical(&canonical_form(&plan), ds.catalog(), ref_date());
            prop_assert_eq!(back, Ok(plan));
        }
    }

    #[test]
    fn parse_survives_arbitrary_unicode(text in "\\PC{0,60}") {
        let _ = parse(&text);
    }

    #[test]
    fn company_substitution_keeps_intent(
        t in prop::sample::select(vec![
            "Plot the revenue of {} in 2020",
            "What was {}'s revenue in 2024?",
            "Show me the employees of {} since 2016",
            "How did {} rank on the Global 500 in 2019?",
        ]),
        a in prop::sample::select(vec!["Apple", "Walmart", "Toyota Motor", "Samsung Electronics"]),
        b in prop::sample::select(vec!["Google", "Shell", "Nvidia", "Amazon"]),
    ) {
        let g = Grammar::default();
        prop_assert_eq!(classify_intent(&t.replace("{}", a), &g), classify_intent(&t.replace("{}", b), &g));
    }
}
