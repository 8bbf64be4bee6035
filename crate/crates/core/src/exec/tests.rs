use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use proptest::prelude::*;

use super::*;
use crate::metrics::testing::{rec, sample_dataset};
use crate::metrics::{Dataset, Metric};
use crate::query::{parse_canonical, ChartType, QueryPlan};

fn ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

fn plan(ds: &Dataset, s: &str) -> QueryPlan {
    parse_canonical(s, ds.catalog(), ref_date()).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn run(ds: &Dataset, s: &str) -> Result<ExecutionResult, ExecError> {
    execute(&plan(ds, s), ds, SandboxLimits::default(), &NoClock)
}

#[test]
fn bar_chart_of_three_companies() {
    let ds = sample_dataset();
    let out = run(&ds, "chart bar list=g500 metrics=revenue companies=Apple,Google,Nvidia years=2024").unwrap();
    let spec = out.chart_spec.unwrap();
    assert_eq!(spec.chart_type, ChartType::Bar);
    assert_eq!(spec.x.field, "company");
    assert_eq!(spec.x.kind, ColumnKind::Categorical);
    assert_eq!(spec.y.field, "revenue_musd");
    assert_eq!(spec.rows.len(), 3);
    for row in &spec.rows {
        let name = row.get("company").unwrap().text().unwrap();
        let stored = ds
            .records()
            .iter()
            .find(|r| r.company == name && r.year == 2024 && r.list_id == "g500")
            .unwrap()
            .revenue
            .unwrap();
        assert_eq!(row.get("revenue_musd").unwrap().number(), Some(stored));
    }
    let ys: Vec<f64> = spec.rows.iter().map(|r| r.get("revenue_musd").unwrap().number().unwrap()).collect();
    assert!(ys.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn missing_value_stays_in_table_but_not_in_chart() {
    let mut b = rec("g500", 2023, 2, "Beta");
    b.revenue = None;
    let ds = Dataset::from_records(vec![rec("g500", 2023, 1, "Alpha"), b]).unwrap();
    let out = run(&ds, "chart bar list=g500 metrics=revenue companies=Alpha,Beta years=2023").unwrap();
    assert_eq!(out.table.rows.len(), 2);
    assert!(out.table.rows[1][4].is_missing());
    assert_eq!(out.chart_spec.unwrap().rows.len(), 1);
}

#[test]
fn top_k_orders_by_metric() {
    let recs: Vec<_> = [("A", 100.0), ("B", 300.0), ("C", 200.0), ("D", 50.0)]
        .iter()
        .enumerate()
        .map(|(i, (n, v))| {
            let mut r = rec("g500", 2023, i as u32 + 1, n);
            r.revenue = Some(*v);
            r
        })
        .collect();
    let ds = Dataset::from_records(recs).unwrap();
    let out = run(&ds, "ranking list=g500 metric=revenue top=3 years=2023").unwrap();
    let names: Vec<&str> = out.table.rows.iter().map(|r| r[3].text().unwrap()).collect();
    assert_eq!(names, ["B", "C", "A"]);
}

#[test]
fn ties_break_by_stored_rank_then_name() {
    let recs: Vec<_> = ["Zed", "Amy", "Bob"]
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut r = rec("g500", 2023, 3 - i as u32, n);
            r.revenue = Some(7.0);
            r
        })
        .collect();
    let ds = Dataset::from_records(recs).unwrap();
    let out = run(&ds, "ranking list=g500 metric=revenue top=3 years=2023").unwrap();
    let names: Vec<&str> = out.table.rows.iter().map(|r| r[3].text().unwrap()).collect();
    assert_eq!(names, ["Bob", "Amy", "Zed"]);
}

#[test]
fn line_chart_series() {
    let ds = sample_dataset();
    let one = run(&ds, "chart line list=g500 metrics=revenue companies=Apple years=2015..2024").unwrap();
    let spec = one.chart_spec.unwrap();
    assert_eq!((spec.x.field.as_str(), spec.x.kind), ("year", ColumnKind::Temporal));
    assert_eq!(spec.series_field, None);
    let many = run(&ds, "chart line list=g500 metrics=revenue companies=Apple,Google years=2015..2024").unwrap();
    let spec = many.chart_spec.unwrap();
    assert_eq!(spec.series_field.as_deref(), Some("company"));
    assert_eq!(spec.rows.len(), 20);
    assert_eq!(spec.rows[0].get("company").unwrap().text(), Some("Apple"));
    assert_eq!(spec.rows[10].get("company").unwrap().text(), Some("Google"));
}

#[test]
fn scatter_rows_by_rank() {
    let ds = sample_dataset();
    let out = run(&ds, "chart scatter list=f1000 metrics=revenue,employees top=3 years=2024").unwrap();
    let spec = out.chart_spec.unwrap();
    assert_eq!(spec.x.kind, ColumnKind::Quantitative);
    assert_eq!(spec.rows.len(), 3);
    let json = spec.to_canonical_json();
    assert!(json.starts_with(r#"{"version":1,"chart_type":"scatter","title":"#), "{json}");
}

#[test]
fn chart_json_is_byte_stable() {
    let ds = sample_dataset();
    let s = "chart bar list=g500 metrics=revenue group=sector:sum years=2023";
    let a = run(&ds, s).unwrap().chart_spec.unwrap().to_canonical_json();
    let b = run(&ds, s).unwrap().chart_spec.unwrap().to_canonical_json();
    assert_eq!(a, b);
    let back: ChartSpec = serde_json::from_str(&a).unwrap();
    assert_eq!(back.to_canonical_json(), a);
}

#[test]
fn budgets_abort_without_partial_results() {
    let ds = sample_dataset();
    let p = plan(&ds, "ranking list=g500 metric=revenue top=5 years=2015..2024");
    let tight = SandboxLimits {
        max_rows_scanned: 20,
        ..SandboxLimits::default()
    };
    assert_eq!(
        execute(&p, &ds, tight, &NoClock),
        Err(ExecError::Budget { resource: BudgetKind::RowsScanned })
    );
    struct Slow;
    impl Clock for Slow {
        fn elapsed_ms(&self) -> u64 {
            10_000
        }
    }
    assert_eq!(
        execute(&p, &ds, SandboxLimits::default(), &Slow),
        Err(ExecError::Budget { resource: BudgetKind::WallClock })
    );
    let few = SandboxLimits {
        max_output_rows: 3,
        ..SandboxLimits::default()
    };
    assert_eq!(
        execute(&p, &ds, few, &NoClock),
        Err(ExecError::Budget { resource: BudgetKind::OutputRows })
    );
}

#[test]
fn rejected_and_empty_plans() {
    let ds = sample_dataset();
    let p = plan(&ds, "metric company=Walmart metric=revenue years=2031 reject latest=2024");
    assert_eq!(execute(&p, &ds, SandboxLimits::default(), &NoClock), Err(ExecError::Rejected));
    assert_eq!(oracle_execute(&p, &ds), Err(ExecError::Rejected));
    let mut b = rec("g500", 2023, 1, "Alpha");
    b.profits = None;
    let ds = Dataset::from_records(vec![b]).unwrap();
    let p = plan(&ds, "ranking list=g500 metric=profits top=3 years=2023");
    assert_eq!(execute(&p, &ds, SandboxLimits::default(), &NoClock), Err(ExecError::EmptyResult));
    assert_eq!(oracle_execute(&p, &ds), Err(ExecError::EmptyResult));
}

#[test]
fn metric_question_without_list_prefers_g500() {
    let ds = sample_dataset();
    let out = run(&ds, "metric company=Walmart metric=revenue,employees years=2023..2024").unwrap();
    assert_eq!(out.table.rows.len(), 2);
    assert!(out.table.rows.iter().all(|r| r[1] == Cell::Text("g500".into())));
    assert_eq!(out.table, oracle_execute(&plan(&ds, "metric company=Walmart metric=revenue,employees years=2023..2024"), &ds).unwrap());
}

fn plan_strings() -> impl Strategy<Value = String> {
    let companies = prop::sample::subsequence(
        vec!["Amazon", "Apple", "Google", "Nvidia", "Samsung Electronics", "Shell", "Toyota Motor", "Walmart"],
        1..4,
    );
    let metric = prop::sample::select(Metric::ALL.to_vec());
    let list = prop::sample::select(vec!["g500", "f1000"]);
    let years = (2013i32..2026, 0i32..4).prop_map(|(a, n)| if n == 0 { format!("{a}") } else { format!("{a}..{}", a + n) });
    (0u8..6, companies, metric.clone(), metric, list, years, 1u32..12, prop::sample::select(vec!["sector", "country"]), prop::sample::select(vec!["sum", "avg", "count", "min", "max"]))
        .prop_map(|(kind, cs, m1, m2, list, years, k, key, agg)| {
            let cs = cs.join(",");
            match kind {
                0 => format!("metric company={cs} metric={} years={years}", m1.id()),
                1 => format!("metric list={list} company={cs} metric={},{} years={years}", m1.id(), m2.id()),
                2 => format!("ranking list={list} metric={} top={k} years={years}", m1.id()),
                3 => format!("chart bar list={list} metrics={} companies={cs} years={years}", m1.id()),
                4 => format!("chart scatter list={list} metrics={},{} top={k} years={years}", m1.id(), m2.id()),
                _ => format!("chart line list={list} metrics={} group={key}:{agg} years={years}", m1.id()),
            }
        })
}

proptest! {
    #[test]
    fn executor_matches_oracle(s in plan_strings()) {
        let ds = sample_dataset();
        // Strings whose years fall outside coverage do not describe a valid plan.
        if let Ok(p) = parse_canonical(&s, ds.catalog(), ref_date()) {
            let fast = execute(&p, &ds, SandboxLimits::default(), &NoClock).map(|r| r.table);
            prop_assert_eq!(fast, oracle_execute(&p, &ds));
        }
    }
}
