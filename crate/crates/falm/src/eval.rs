//! Offline evaluation: templated visualization prompts, metric and ranking
//! QA, and the guardrail suites.
//!
//! Expectations come from the reference executor and from linear scans of
//! the raw records, never from the engine under test.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use chrono::NaiveDate;
use falm_core::engine::{Engine, EngineConfig};
use falm_core::exec::{emit_chart_spec, execute, oracle_execute, Cell, ChartSpec, ResultTable, SandboxLimits};
use falm_core::guardrails::{Guardrails, PiiKind};
use falm_core::metrics::{CompanyRecord, Dataset, Metric};
use falm_core::query::{canonical_form, parse_canonical, parse_query, Grammar};
use falm_core::reference::index_corpus;
use falm_core::respond::{format_value, AnswerKind, RejectionReason};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::WallClock;
use crate::fixtures::{HarmfulPrompt, SeededCard};

/// Relative tolerance for numeric cell comparison.
pub const VALUE_RTOL: f64 = 1e-9;

/// Fixed "today" for evaluation prompts.
pub fn eval_ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).expect("valid date")
}

pub const EVAL_NOTE: &str = "Prompts come from hand-authored paraphrase templates over synthetic \
fixture data, not from a survey of free-form user prompts. Results measure agreement with a \
reference executor and hand-built oracles, not accuracy on real rankings.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VizCategory {
    Bar,
    Line,
    Scatter,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaKind {
    Metric,
    MetricFuture,
    Ranking,
    RankingRedirect,
}

/// A prompt family. `plan` and `prompts` share `{slot}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub category: VizCategory,
    pub plan: String,
    pub prompts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaTemplate {
    pub id: String,
    pub kind: QaKind,
    pub prompts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFile {
    #[serde(default)]
    pub template: Vec<Template>,
    #[serde(default)]
    pub qa: Vec<QaTemplate>,
}

impl TemplateFile {
    pub fn parse(text: &str) -> anyhow::Result<TemplateFile> {
        let file: TemplateFile = toml::from_str(text)?;
        for t in &file.template {
            anyhow::ensure!(!t.prompts.is_empty(), "template {} has no prompts", t.id);
        }
        for t in &file.qa {
            anyhow::ensure!(!t.prompts.is_empty(), "qa template {} has no prompts", t.id);
        }
        Ok(file)
    }
}

/// Replace every `{name}` with its slot value.
fn fill_slots(text: &str, slots: &BTreeMap<String, String>) -> String {
    let mut out = text.to_string();
    for (k, v) in slots {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Metric id and a phrase the grammar maps to it.
const METRIC_PHRASES: [(&str, &[&str]); 5] = [
    ("revenue", &["revenue", "sales"]),
    ("profits", &["profits", "net income"]),
    ("assets", &["assets", "total assets"]),
    ("market_value", &["market value", "market cap"]),
    ("employees", &["employees", "headcount"]),
];

const AGGREGATES: [(&str, &[&str]); 4] = [
    ("sum", &["total", "combined"]),
    ("avg", &["average", "mean"]),
    ("max", &["highest", "maximum"]),
    ("min", &["lowest", "minimum"]),
];

/// Values every template may draw from.
struct SlotPool {
    /// Companies on the main list in every one of its years, under one name.
    stable: Vec<String>,
    /// Same, restricted to the second list.
    stable_f: Vec<String>,
    g_years: Vec<i32>,
    f_years: Vec<i32>,
}

impl SlotPool {
    fn new(ds: &Dataset) -> SlotPool {
        let years_of = |list: &str| -> Vec<i32> {
            let s: BTreeSet<i32> = ds.records().iter().filter(|r| r.list_id == list).map(|r| r.year).collect();
            s.into_iter().collect()
        };
        let (g_years, f_years) = (years_of("g500"), years_of("f1000"));
        let stable_on = |list: &str, years: &[i32]| -> Vec<String> {
            let mut per: BTreeMap<&str, BTreeSet<i32>> = BTreeMap::new();
            for r in ds.records().iter().filter(|r| r.list_id == list) {
                per.entry(&r.company).or_default().insert(r.year);
            }
            per.into_iter()
                .filter(|(name, ys)| ys.len() == years.len() && ds.catalog().canonical_of(name) == Some(*name))
                .map(|(name, _)| name.to_string())
                .collect()
        };
        SlotPool { stable: stable_on("g500", &g_years), stable_f: stable_on("f1000", &f_years), g_years, f_years }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, text: &str) -> BTreeMap<String, String> {
        let mut slots = BTreeMap::new();
        let mut set = |k: &str, v: String| {
            slots.insert(k.to_string(), v);
        };
        let uses = |k: &str| text.contains(&format!("{{{k}}}"));
        let pool = if uses("fc1") { &self.stable_f } else { &self.stable };
        let n = (1..=5).take_while(|i| uses(&format!("c{i}")) || uses(&format!("fc{i}"))).count();
        let picked: Vec<&String> = pool.choose_multiple(rng, n).collect();
        for (i, c) in picked.iter().enumerate() {
            set(&format!("c{}", i + 1), c.to_string());
            set(&format!("fc{}", i + 1), c.to_string());
        }
        let mut sorted: Vec<&str> = picked.iter().map(|s| s.as_str()).collect();
        sorted.sort_unstable();
        set("companies", sorted.join(","));
        set("year", self.g_years.choose(rng).expect("years").to_string());
        set("fyear", self.f_years.choose(rng).expect("years").to_string());
        let i = rng.gen_range(0..self.g_years.len() - 2);
        let j = rng.gen_range(i + 2..self.g_years.len());
        set("y1", self.g_years[i].to_string());
        set("y2", self.g_years[j].to_string());
        let ms: Vec<&(&str, &[&str])> = METRIC_PHRASES.choose_multiple(rng, 2).collect();
        set("metric", ms[0].0.to_string());
        set("metric_phrase", ms[0].1.choose(rng).expect("phrases").to_string());
        set("metric2", ms[1].0.to_string());
        set("metric2_phrase", ms[1].1.choose(rng).expect("phrases").to_string());
        let (agg, agg_phrases) = AGGREGATES.choose(rng).expect("aggregates");
        set("agg", agg.to_string());
        set("agg_phrase", agg_phrases.choose(rng).expect("phrases").to_string());
        set("k", rng.gen_range(3..=15).to_string());
        slots
    }
}

/// One generated visualization case with its reference result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VizCase {
    pub id: String,
    pub template_id: String,
    pub category: VizCategory,
    pub prompt: String,
    /// Canonical form of the plan the prompt is meant to produce.
    pub intended_plan: String,
    pub expected_table: ResultTable,
    pub expected_chart: Option<ChartSpec>,
}

/// Fill templates round-robin until `n` cases exist. A draw whose plan does
/// not exist in the data is redrawn.
pub fn gen_templated_prompts(
    file: &TemplateFile,
    ds: &Dataset,
    seed: u64,
    n: usize,
) -> anyhow::Result<Vec<VizCase>> {
    anyhow::ensure!(!file.template.is_empty(), "no visualization templates");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = SlotPool::new(ds);
    let ref_date = eval_ref_date();
    let mut out = Vec::with_capacity(n);
    let mut failures = 0usize;
    while out.len() < n {
        let t = &file.template[out.len() % file.template.len()];
        let prompt_template = t.prompts.choose(&mut rng).expect("non-empty prompts");
        let slots = pool.draw(&mut rng, &format!("{} {prompt_template}", t.plan));
        let plan_text = fill_slots(&t.plan, &slots);
        let reference = parse_canonical(&plan_text, ds.catalog(), ref_date)
            .map_err(anyhow::Error::msg)
            .and_then(|plan| {
                let table = oracle_execute(&plan, ds).map_err(anyhow::Error::msg)?;
                let chart = match t.category {
                    VizCategory::Table => None,
                    _ => Some(emit_chart_spec(&table, &plan).map_err(anyhow::Error::msg)?),
                };
                Ok((plan, table, chart))
            });
        match reference {
            Ok((plan, table, chart)) => out.push(VizCase {
                id: format!("viz-{:04}", out.len() + 1),
                template_id: t.id.clone(),
                category: t.category,
                prompt: fill_slots(prompt_template, &slots),
                intended_plan: canonical_form(&plan),
                expected_table: table,
                expected_chart: chart,
            }),
            Err(e) => {
                failures += 1;
                anyhow::ensure!(failures < 50 * n.max(1), "template {} never yields a valid plan: {e}", t.id);
            }
        }
    }
    Ok(out)
}

fn numbers_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= VALUE_RTOL * a.abs().max(b.abs())
}

pub fn cells_match(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Text(x), Cell::Text(y)) => x == y,
        (Cell::Missing, Cell::Missing) => true,
        _ => match (a.number(), b.number()) {
            (Some(x), Some(y)) => numbers_close(x, y),
            _ => false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VizCaseResult {
    pub id: String,
    pub template_id: String,
    pub category: VizCategory,
    pub prompt: String,
    pub intended_plan: String,
    /// Canonical form of what the prompt parsed to, when it parsed.
    pub parsed_plan: Option<String>,
    pub plan_matches: bool,
    pub executed: bool,
    pub data_match: bool,
    /// `parse:<kind>`, `runtime:<kind>` or `mismatch:<what>`.
    pub failure: Option<String>,
    /// First differing element, for failed comparisons.
    pub diff: Option<String>,
    #[serde(skip)]
    pub latency_us: u64,
}

/// `executed = cases - parse_errors - runtime_errors` holds exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Rates {
    pub cases: usize,
    pub parse_errors: usize,
    pub runtime_errors: usize,
    pub executed: usize,
    pub matched: usize,
    pub exec_rate: f64,
    pub data_match_rate: f64,
}

impl Rates {
    fn add(&mut self, r: &VizCaseResult) {
        self.cases += 1;
        match r.failure.as_deref() {
            Some(f) if f.starts_with("parse:") => self.parse_errors += 1,
            Some(f) if f.starts_with("runtime:") => self.runtime_errors += 1,
            _ => {}
        }
        self.executed += usize::from(r.executed);
        self.matched += usize::from(r.data_match);
        let n = self.cases as f64;
        self.exec_rate = self.executed as f64 / n;
        self.data_match_rate = self.matched as f64 / n;
    }
}

/// Wall-clock figures; the only part of a report that varies between runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub p50_latency_us: u64,
    pub p95_latency_us: u64,
    pub by_category_p50_us: BTreeMap<VizCategory, u64>,
    pub by_category_p95_us: BTreeMap<VizCategory, u64>,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VizReport {
    pub overall: Rates,
    pub by_category: BTreeMap<VizCategory, Rates>,
    pub failures: BTreeMap<String, usize>,
    pub plan_match_rate: f64,
    /// Failed cases only.
    pub failed_cases: Vec<VizCaseResult>,
    pub timing: Timing,
}

fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

fn exec_error_kind(e: &falm_core::exec::ExecError) -> &'static str {
    use falm_core::exec::ExecError::*;
    match e {
        Budget { .. } => "budget",
        EmptyResult => "empty_result",
        ColumnAbsent { .. } => "column_absent",
        Rejected => "rejected",
        InvalidPlan { .. } => "invalid_plan",
    }
}

fn cell_text(c: &Cell) -> String {
    serde_json::to_string(c).unwrap_or_default()
}

/// Why two tables differ, or `None` when they match.
pub fn table_diff(want: &ResultTable, got: &ResultTable) -> Option<(&'static str, String)> {
    if want.columns != got.columns {
        let names = |t: &ResultTable| t.columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>().join(",");
        return Some(("columns", format!("expected [{}], got [{}]", names(want), names(got))));
    }
    if want.rows.len() != got.rows.len() {
        return Some(("row_count", format!("expected {} rows, got {}", want.rows.len(), got.rows.len())));
    }
    for (i, (a, b)) in want.rows.iter().zip(&got.rows).enumerate() {
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            if !cells_match(x, y) {
                let col = &want.columns[j].name;
                return Some(("values", format!("row {i} {col}: expected {}, got {}", cell_text(x), cell_text(y))));
            }
        }
    }
    None
}

/// Why two chart specs differ, or `None` when they match.
pub fn chart_diff(want: &ChartSpec, got: &ChartSpec) -> Option<(&'static str, String)> {
    if want.chart_type != got.chart_type || want.x != got.x || want.y != got.y || want.series_field != got.series_field {
        return Some((
            "axes",
            format!(
                "expected {:?} x={} y={} series={:?}, got {:?} x={} y={} series={:?}",
                want.chart_type, want.x.field, want.y.field, want.series_field, got.chart_type, got.x.field, got.y.field, got.series_field
            ),
        ));
    }
    if want.rows.len() != got.rows.len() {
        return Some(("row_count", format!("expected {} rows, got {}", want.rows.len(), got.rows.len())));
    }
    for (i, (a, b)) in want.rows.iter().zip(&got.rows).enumerate() {
        if a.0.len() != b.0.len() {
            return Some(("values", format!("row {i}: expected {} fields, got {}", a.0.len(), b.0.len())));
        }
        for ((k1, v1), (k2, v2)) in a.0.iter().zip(&b.0) {
            if k1 != k2 || !cells_match(v1, v2) {
                return Some(("values", format!("row {i}: expected {k1}={}, got {k2}={}", cell_text(v1), cell_text(v2))));
            }
        }
    }
    None
}

/// Same columns in the same order and cell-wise equal rows.
pub fn tables_match(a: &ResultTable, b: &ResultTable) -> bool {
    table_diff(a, b).is_none()
}

/// Same chart type, axes and series, and equal rows in order.
pub fn charts_match(a: &ChartSpec, b: &ChartSpec) -> bool {
    chart_diff(a, b).is_none()
}

/// Parse, execute and compare one case.
pub fn run_viz_case(case: &VizCase, ds: &Dataset, grammar: &Grammar, limits: SandboxLimits) -> VizCaseResult {
    let t0 = Instant::now();
    let clock = WallClock::start();
    let mut r = VizCaseResult {
        id: case.id.clone(),
        template_id: case.template_id.clone(),
        category: case.category,
        prompt: case.prompt.clone(),
        intended_plan: case.intended_plan.clone(),
        parsed_plan: None,
        plan_matches: false,
        executed: false,
        data_match: false,
        failure: None,
        diff: None,
        latency_us: 0,
    };
    match parse_query(&case.prompt, ds.catalog(), eval_ref_date(), grammar) {
        Err(d) => {
            r.failure = Some(format!("parse:{}", d.kind.as_str()));
            r.diff = Some(d.message);
        }
        Ok(plan) => {
            let parsed = canonical_form(&plan);
            r.plan_matches = parsed == case.intended_plan;
            r.parsed_plan = Some(parsed);
            match execute(&plan, ds, limits, &clock) {
                Err(e) => {
                    r.failure = Some(format!("runtime:{}", exec_error_kind(&e)));
                    r.diff = Some(e.to_string());
                }
                Ok(result) => {
                    r.executed = true;
                    let diff = match (&case.expected_chart, &result.chart_spec) {
                        (Some(want), Some(got)) => chart_diff(want, got),
                        (Some(_), None) => Some(("no_chart", "expected a chart spec".to_string())),
                        (None, _) => table_diff(&case.expected_table, &result.table),
                    };
                    match diff {
                        None => r.data_match = true,
                        Some((what, detail)) => {
                            r.failure = Some(format!("mismatch:{what}"));
                            r.diff = Some(detail);
                        }
                    }
                }
            }
        }
    }
    r.latency_us = t0.elapsed().as_micros() as u64;
    r
}

/// Parse and execute every case, comparing against its reference.
pub fn run_viz_eval(cases: &[VizCase], ds: &Dataset, grammar: &Grammar, limits: SandboxLimits) -> VizReport {
    let started = Instant::now();
    let results: Vec<VizCaseResult> = cases.iter().map(|c| run_viz_case(c, ds, grammar, limits)).collect();
    let mut overall = Rates::default();
    let mut by_category: BTreeMap<VizCategory, Rates> = BTreeMap::new();
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    let mut latencies: BTreeMap<VizCategory, Vec<u64>> = BTreeMap::new();
    for r in &results {
        overall.add(r);
        by_category.entry(r.category).or_default().add(r);
        latencies.entry(r.category).or_default().push(r.latency_us);
        if let Some(f) = &r.failure {
            *failures.entry(f.clone()).or_default() += 1;
        }
    }
    let mut all: Vec<u64> = results.iter().map(|r| r.latency_us).collect();
    all.sort_unstable();
    for l in latencies.values_mut() {
        l.sort_unstable();
    }
    let plan_match_rate = if results.is_empty() {
        0.0
    } else {
        results.iter().filter(|r| r.plan_matches).count() as f64 / results.len() as f64
    };
    VizReport {
        overall,
        by_category,
        failures,
        plan_match_rate,
        failed_cases: results.into_iter().filter(|r| !r.data_match).collect(),
        timing: Timing {
            p50_latency_us: percentile(&all, 0.5),
            p95_latency_us: percentile(&all, 0.95),
            by_category_p50_us: latencies.iter().map(|(k, v)| (*k, percentile(v, 0.5))).collect(),
            by_category_p95_us: latencies.iter().map(|(k, v)| (*k, percentile(v, 0.95))).collect(),
            total_ms: started.elapsed().as_millis() as u64,
        },
    }
}

/// An engine over `ds` with no articles and an empty lexicon.
pub fn qa_engine(ds: Dataset) -> Engine {
    let index = index_corpus(&[]).expect("empty corpus indexes");
    let guardrails = Guardrails::from_lexicon_text("").expect("empty lexicon parses");
    Engine::new(ds, index, guardrails, EngineConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaCase {
    pub id: String,
    pub kind: QaKind,
    pub prompt: String,
    pub company: Option<String>,
    pub list_id: String,
    pub metric: Option<Metric>,
    pub year: i32,
    pub top_k: Option<u32>,
}

/// Rows of `list_id` in `year`, by scanning the raw records.
fn list_year<'a>(records: &'a [CompanyRecord], list_id: &str, year: i32) -> Vec<&'a CompanyRecord> {
    let mut rows: Vec<&CompanyRecord> = records.iter().filter(|r| r.list_id == list_id && r.year == year).collect();
    rows.sort_by_key(|r| r.rank);
    rows
}

/// The covered year closest to `year`, later year on ties.
pub fn closest_year_oracle(records: &[CompanyRecord], list_id: &str, year: i32) -> Option<i32> {
    let mut best: Option<i32> = None;
    for r in records.iter().filter(|r| r.list_id == list_id) {
        best = Some(match best {
            None => r.year,
            Some(b) => {
                let (d, db) = ((r.year - year).abs(), (b - year).abs());
                if d < db || (d == db && r.year > b) {
                    r.year
                } else {
                    b
                }
            }
        });
    }
    best
}

/// Generate `n` QA cases, cycling through the QA templates.
pub fn gen_qa_cases(file: &TemplateFile, ds: &Dataset, seed: u64, n: usize) -> anyhow::Result<Vec<QaCase>> {
    anyhow::ensure!(!file.qa.is_empty(), "no QA templates");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9A);
    let pool = SlotPool::new(ds);
    let metrics = [Metric::Revenue, Metric::Profits, Metric::Employees, Metric::Assets];
    let phrase = |m: Metric| match m {
        Metric::Revenue => "revenue",
        Metric::Profits => "profits",
        Metric::Employees => "number of employees",
        _ => "total assets",
    };
    let f_missing: Vec<i32> = (pool.f_years[0] - 1..=pool.f_years[pool.f_years.len() - 1] + 1)
        .filter(|y| !pool.f_years.contains(y))
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = &file.qa[i % file.qa.len()];
        let prompt = t.prompts.choose(&mut rng).expect("non-empty prompts");
        let company = pool.stable.choose(&mut rng).expect("companies").clone();
        let metric = *metrics.choose(&mut rng).expect("metrics");
        let last = *pool.g_years.last().expect("years");
        let (year, list_id, top_k) = match t.kind {
            QaKind::Metric => (*pool.g_years.choose(&mut rng).expect("years"), "g500", None),
            QaKind::MetricFuture => (last + rng.gen_range(1..=6), "g500", None),
            QaKind::Ranking => {
                let k = *[5u32, 10].choose(&mut rng).expect("k");
                if rng.gen_bool(0.5) {
                    (*pool.g_years.choose(&mut rng).expect("years"), "g500", Some(k))
                } else {
                    (*pool.f_years.choose(&mut rng).expect("years"), "f1000", Some(k))
                }
            }
            QaKind::RankingRedirect => {
                (*f_missing.choose(&mut rng).expect("gaps"), "f1000", Some(*[5u32, 10].choose(&mut rng).expect("k")))
            }
        };
        let list_phrase = if list_id == "g500" { "Global 500" } else { "Fortune 1000" };
        let mut slots = BTreeMap::new();
        slots.insert("company".to_string(), company.clone());
        slots.insert("metric_phrase".to_string(), phrase(metric).to_string());
        slots.insert("year".to_string(), year.to_string());
        slots.insert("list".to_string(), list_phrase.to_string());
        slots.insert("k".to_string(), top_k.unwrap_or(0).to_string());
        let is_metric = matches!(t.kind, QaKind::Metric | QaKind::MetricFuture);
        out.push(QaCase {
            id: format!("qa-{:04}", i + 1),
            kind: t.kind,
            prompt: fill_slots(prompt, &slots),
            company: is_metric.then_some(company),
            list_id: list_id.to_string(),
            metric: is_metric.then_some(metric),
            year,
            top_k,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaCaseResult {
    pub id: String,
    pub kind: QaKind,
    pub prompt: String,
    /// Canonical plan the engine answered with.
    pub plan: Option<String>,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaReport {
    pub cases: usize,
    pub passed: usize,
    /// Pass rate per kind.
    pub by_kind: BTreeMap<String, (usize, usize)>,
    pub exact_match: f64,
    pub reject_with_latest: f64,
    pub top5: f64,
    pub top10: f64,
    pub redirect_closest: f64,
    pub results: Vec<QaCaseResult>,
}

fn table_column<'a>(t: &'a ResultTable, name: &str) -> Vec<&'a Cell> {
    match t.column_index(name) {
        Some(i) => t.rows.iter().map(|r| &r[i]).collect(),
        None => Vec::new(),
    }
}

fn metric_value(r: &CompanyRecord, m: Metric) -> Option<f64> {
    match m {
        Metric::Revenue => r.revenue,
        Metric::Profits => r.profits,
        Metric::Assets => r.assets,
        Metric::Employees => r.employees.map(|e| e as f64),
        _ => None,
    }
}

fn check_qa(engine: &Engine, case: &QaCase) -> (Option<String>, Result<(), String>) {
    let answer = engine.answer(&case.prompt, eval_ref_date(), &WallClock::start()).answer;
    (answer.provenance.plan.clone(), check_qa_answer(engine, case, &answer))
}

fn check_qa_answer(engine: &Engine, case: &QaCase, answer: &falm_core::respond::Answer) -> Result<(), String> {
    let records = engine.dataset().records();
    let table = answer.payload.as_ref().and_then(|p| p.table.as_ref());
    match case.kind {
        QaKind::Metric | QaKind::MetricFuture => {
            let (company, metric) = (case.company.as_deref().unwrap_or(""), case.metric.unwrap_or(Metric::Revenue));
            let year = if case.kind == QaKind::Metric {
                if answer.kind != AnswerKind::Metric {
                    return Err(format!("expected a metric answer, got {:?}: {}", answer.kind, answer.text));
                }
                case.year
            } else {
                let reason = answer.rejection.as_ref().map(|r| r.reason);
                if reason != Some(RejectionReason::Boundary) {
                    return Err(format!("expected a boundary rejection, got {reason:?}"));
                }
                let latest = records.iter().filter(|r| r.list_id == case.list_id).map(|r| r.year).max().unwrap_or(0);
                if !answer.boundary_note.as_deref().unwrap_or("").contains(&latest.to_string()) {
                    return Err("boundary note does not name the latest year".into());
                }
                latest
            };
            let row = records.iter().find(|r| r.list_id == case.list_id && r.year == year && r.company == company);
            let want = row.and_then(|r| metric_value(r, metric));
            let got = table.and_then(|t| table_column(t, metric.field()).first().map(|c| c.number()));
            match want {
                Some(v) => {
                    if got != Some(Some(v)) {
                        return Err(format!("value {got:?}, expected {v}"));
                    }
                    let shown = if metric.is_integer() {
                        falm_core::metrics::Number::Int(v as i64)
                    } else {
                        falm_core::metrics::Number::Real(v)
                    };
                    let text = format!("{} {}", answer.text, answer.boundary_note.as_deref().unwrap_or(""));
                    let formatted = format_value(metric.unit(), shown);
                    if case.kind == QaKind::Metric && !text.contains(&formatted) {
                        return Err(format!("text does not state {formatted}"));
                    }
                    Ok(())
                }
                None if got.flatten().is_none() => Ok(()),
                None => Err(format!("value {got:?} for a missing cell")),
            }
        }
        QaKind::Ranking | QaKind::RankingRedirect => {
            if answer.kind != AnswerKind::Ranking {
                return Err(format!("expected a ranking, got {:?}: {}", answer.kind, answer.text));
            }
            let year = if case.kind == QaKind::Ranking {
                case.year
            } else {
                let nearest = closest_year_oracle(records, &case.list_id, case.year).unwrap_or(0);
                let note = answer.boundary_note.as_deref().unwrap_or("");
                if !note.contains(&nearest.to_string()) || !note.contains(&case.year.to_string()) {
                    return Err(format!("redirect note {note:?} does not name {} and {nearest}", case.year));
                }
                nearest
            };
            let k = case.top_k.unwrap_or(0) as usize;
            // Answers name companies by their current spelling.
            let catalog = engine.dataset().catalog();
            let want: Vec<&str> = list_year(records, &case.list_id, year)
                .iter()
                .take(k)
                .map(|r| catalog.canonical_of(&r.company).unwrap_or(&r.company))
                .collect();
            let got: Vec<&str> = table.map(|t| table_column(t, "company").iter().filter_map(|c| c.text()).collect()).unwrap_or_default();
            let years: BTreeSet<i64> = table
                .map(|t| table_column(t, "year").iter().filter_map(|c| c.number()).map(|y| y as i64).collect())
                .unwrap_or_default();
            if got != want {
                return Err(format!("companies {got:?}, expected {want:?}"));
            }
            if years != BTreeSet::from([i64::from(year)]) {
                return Err(format!("years {years:?}, expected {year}"));
            }
            Ok(())
        }
    }
}

pub fn run_qa_eval(engine: &Engine, cases: &[QaCase]) -> QaReport {
    let mut results = Vec::with_capacity(cases.len());
    for case in cases {
        let (plan, verdict) = check_qa(engine, case);
        results.push(QaCaseResult {
            id: case.id.clone(),
            kind: case.kind,
            prompt: case.prompt.clone(),
            plan,
            passed: verdict.is_ok(),
            detail: verdict.err(),
        });
    }
    let rate = |pred: &dyn Fn(&QaCase) -> bool| {
        let picked: Vec<bool> = cases.iter().zip(&results).filter(|(c, _)| pred(c)).map(|(_, r)| r.passed).collect();
        if picked.is_empty() {
            0.0
        } else {
            picked.iter().filter(|p| **p).count() as f64 / picked.len() as f64
        }
    };
    let mut by_kind: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (c, r) in cases.iter().zip(&results) {
        let key = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let e = by_kind.entry(key).or_default();
        e.0 += usize::from(r.passed);
        e.1 += 1;
    }
    QaReport {
        cases: cases.len(),
        passed: results.iter().filter(|r| r.passed).count(),
        by_kind,
        exact_match: rate(&|c| c.kind == QaKind::Metric),
        reject_with_latest: rate(&|c| c.kind == QaKind::MetricFuture),
        top5: rate(&|c| c.kind == QaKind::Ranking && c.top_k == Some(5)),
        top10: rate(&|c| c.kind == QaKind::Ranking && c.top_k == Some(10)),
        redirect_closest: rate(&|c| c.kind == QaKind::RankingRedirect),
        results,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRate {
    pub prompts: usize,
    pub rejected: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafetyReport {
    pub harmful: usize,
    pub harmful_rejected: usize,
    pub harmful_reject_rate: f64,
    pub by_category: BTreeMap<String, CategoryRate>,
    /// Harmful prompts that passed the input gate.
    pub missed: Vec<String>,
    pub clean: usize,
    pub clean_rejected: usize,
    /// Clean sentences the input or output gate flagged.
    pub false_positives: Vec<String>,
    pub cards: usize,
    pub cards_found: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SafetyEvalError {
    #[error("the {0} suite is empty")]
    EmptySuite(&'static str),
}

fn digits(s: &str) -> String {
    s.chars().filter(char::is_ascii_digit).collect()
}

pub fn run_safety_eval(
    guardrails: &Guardrails,
    harmful: &[HarmfulPrompt],
    clean: &[String],
    cards: &[SeededCard],
) -> Result<SafetyReport, SafetyEvalError> {
    if harmful.is_empty() {
        return Err(SafetyEvalError::EmptySuite("harmful"));
    }
    if clean.is_empty() {
        return Err(SafetyEvalError::EmptySuite("clean"));
    }
    let mut by_category: BTreeMap<String, CategoryRate> = BTreeMap::new();
    let mut missed = Vec::new();
    for h in harmful {
        let rejected = !guardrails.gate_input(&h.prompt).is_pass();
        let e = by_category.entry(h.category.clone()).or_insert(CategoryRate { prompts: 0, rejected: 0, rate: 0.0 });
        e.prompts += 1;
        e.rejected += usize::from(rejected);
        e.rate = e.rejected as f64 / e.prompts as f64;
        if !rejected {
            missed.push(h.prompt.clone());
        }
    }
    let false_positives: Vec<String> = clean
        .iter()
        .filter(|s| !guardrails.gate_input(s).is_pass() || !guardrails.gate_output(s).is_pass())
        .cloned()
        .collect();
    let cards_found = cards
        .iter()
        .filter(|c| {
            guardrails
                .scan_pii(&c.text)
                .iter()
                .any(|s| s.kind == PiiKind::CreditCard && digits(&c.text[s.range()]) == c.card)
        })
        .count();
    let harmful_rejected = harmful.len() - missed.len();
    Ok(SafetyReport {
        harmful: harmful.len(),
        harmful_rejected,
        harmful_reject_rate: harmful_rejected as f64 / harmful.len() as f64,
        by_category,
        missed,
        clean: clean.len(),
        clean_rejected: false_positives.len(),
        false_positives,
        cards: cards.len(),
        cards_found,
    })
}

/// Written by `falm eval`.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport<T: Serialize> {
    pub suite: &'static str,
    pub note: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub thresholds: BTreeMap<&'static str, f64>,
    pub report: T,
}
