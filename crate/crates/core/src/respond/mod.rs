//! Deterministic answer rendering from fixed templates.

mod format;
mod templates;

#[cfg(test)]
mod tests;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use format::{format_cell, format_decimal, format_value};
pub use templates::{fill, ResponseTemplates};

use crate::exec::{ChartSpec, ExecError, ExecutionResult, ResultTable};
use crate::guardrails::{Category, GuardrailVerdict};
use crate::metrics::{list_display_name, Metric};
use crate::query::{canonical_form, DiagnosticKind, Intent, ParseDiagnostics, QueryPlan};
use crate::temporal::{BoundaryKind, BoundaryOutcome};
use crate::trends::{Direction, TrendScale, TrendSeries, TrendSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Metric,
    Ranking,
    Chart,
    Trend,
    Persona,
    Rejection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<ResultTable>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chart: Option<ChartSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trend: Option<TrendSeries>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trend_summary: Option<TrendSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    OutOfGrammar,
    UnknownEntity,
    OutOfDomain,
    FalsePremise,
    Boundary,
    Safety,
    OutputBlocked,
    EmptyResult,
    Execution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub categories: Vec<Category>,
    pub suggestions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerProvenance {
    pub plan: Option<String>,
    pub dataset_fingerprint: Option<String>,
    pub index_fingerprint: Option<String>,
}

/// A rendered response. Rejections carry no payload except the latest
/// reference table of a boundary rejection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub text: String,
    pub payload: Option<Payload>,
    pub citations: Vec<crate::reference::ReferenceHit>,
    pub boundary_note: Option<String>,
    pub rejection: Option<Rejection>,
    pub provenance: AnswerProvenance,
}

impl Answer {
    fn new(kind: AnswerKind, text: String) -> Answer {
        Answer {
            kind,
            text,
            payload: None,
            citations: Vec::new(),
            boundary_note: None,
            rejection: None,
            provenance: AnswerProvenance::default(),
        }
    }

    fn rejected(text: String, reason: RejectionReason) -> Answer {
        let mut a = Answer::new(AnswerKind::Rejection, text);
        a.rejection = Some(Rejection {
            reason,
            categories: Vec::new(),
            suggestions: Vec::new(),
        });
        a
    }
}

/// `2015-2017, 2020` style year list.
pub fn human_years(years: &[i32]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < years.len() {
        let mut j = i;
        while j + 1 < years.len() && years[j + 1] == years[j] + 1 {
            j += 1;
        }
        parts.push(if j == i {
            years[i].to_string()
        } else {
            format!("{}-{}", years[i], years[j])
        });
        i = j + 1;
    }
    parts.join(", ")
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

fn boundary_note(plan: &QueryPlan, t: &ResponseTemplates) -> Option<String> {
    let b = &plan.boundary;
    match b.kind {
        BoundaryKind::Redirect => {
            let requested = plan.time.years.first()?.to_string();
            let year = b.effective_years.first()?.to_string();
            Some(fill(&t.redirect_note, &[("requested", &requested), ("year", &year)]))
        }
        BoundaryKind::InRange if b.effective_years != plan.time.years => {
            let missing: Vec<i32> = plan
                .time
                .years
                .iter()
                .copied()
                .filter(|y| !b.effective_years.contains(y))
                .collect();
            Some(fill(
                &t.partial_note,
                &[("missing", &human_years(&missing)), ("shown", &human_years(&b.effective_years))],
            ))
        }
        _ => None,
    }
}

fn list_suffix(plan: &QueryPlan) -> String {
    plan.list_id
        .as_deref()
        .map(|l| format!(" on the {}", list_display_name(l)))
        .unwrap_or_default()
}

fn metric_sentences(plan: &QueryPlan, table: &ResultTable, t: &ResponseTemplates) -> Vec<String> {
    let (yi, ci) = (table.column_index("year"), table.column_index("company"));
    let list = list_suffix(plan);
    let mut out = Vec::new();
    for row in &table.rows {
        let year = yi.map(|i| format_cell(None, &row[i])).unwrap_or_default();
        let company = ci.and_then(|i| row[i].text()).unwrap_or_default();
        for m in &plan.metrics {
            let col = table.column_index(m.field());
            let cell = col.map(|i| &row[i]);
            let unit = col.and_then(|i| table.columns[i].unit);
            let verb = if m.noun_is_plural() { "were" } else { "was" };
            let vals = [
                ("company", company),
                ("metric", m.noun()),
                ("list", list.as_str()),
                ("year", year.as_str()),
                ("verb", verb),
            ];
            match cell {
                Some(c) if !c.is_missing() => {
                    let value = format_cell(unit, c);
                    let mut with_value = vals.to_vec();
                    with_value.push(("value", &value));
                    out.push(fill(&t.metric_value, &with_value));
                }
                _ => out.push(fill(&t.metric_missing, &vals)),
            }
        }
    }
    out
}

fn ranking_sentences(plan: &QueryPlan, table: &ResultTable, t: &ResponseTemplates) -> Vec<String> {
    let metric = plan.primary_metric().unwrap_or(Metric::Rank);
    let (yi, ci) = (table.column_index("year"), table.column_index("company"));
    let vi = table.column_index(metric.field());
    let list = plan.list_id.as_deref().map(list_display_name).unwrap_or_default();
    let by = if metric == Metric::Rank { String::new() } else { format!(" by {}", metric.noun()) };
    let k = plan.top_k.map(|k| k.to_string()).unwrap_or_default();
    let mut out = Vec::new();
    for &year in &plan.boundary.effective_years {
        let items: Vec<String> = table
            .rows
            .iter()
            .filter(|r| yi.is_some_and(|i| r[i].number() == Some(f64::from(year))))
            .map(|r| {
                let company = ci.and_then(|i| r[i].text()).unwrap_or_default();
                let value = vi.map(|i| format_cell(table.columns[i].unit, &r[i])).unwrap_or_default();
                fill(&t.ranking_item, &[("company", company), ("value", &value)])
            })
            .collect();
        if items.is_empty() {
            continue;
        }
        let year = year.to_string();
        out.push(fill(
            &t.ranking,
            &[("k", &k), ("list", &list), ("by", &by), ("year", &year), ("items", &join_and(&items))],
        ));
    }
    out
}

/// Render a successful metric, ranking or chart execution.
pub fn render_answer(plan: &QueryPlan, result: &ExecutionResult, t: &ResponseTemplates) -> Answer {
    let (kind, text) = match plan.intent {
        Intent::Chart => {
            let title = result.chart_spec.as_ref().map(|c| c.title.as_str()).unwrap_or_default();
            (AnswerKind::Chart, fill(&t.chart_caption, &[("title", title)]))
        }
        Intent::RankingQa => (AnswerKind::Ranking, ranking_sentences(plan, &result.table, t).join(" ")),
        _ => (AnswerKind::Metric, metric_sentences(plan, &result.table, t).join(" ")),
    };
    let mut a = Answer::new(kind, text);
    a.boundary_note = boundary_note(plan, t);
    a.payload = Some(Payload {
        table: Some(result.table.clone()),
        chart: result.chart_spec.clone(),
        ..Payload::default()
    });
    a.provenance.plan = Some(result.table.provenance.plan.clone());
    a.provenance.dataset_fingerprint = Some(result.table.provenance.dataset_fingerprint.clone());
    a
}

fn bucket_label(scale: TrendScale, d: chrono::NaiveDate) -> String {
    match scale {
        TrendScale::Month | TrendScale::Quarter => d.format("%Y-%m").to_string(),
        TrendScale::Year | TrendScale::MultiYear => d.format("%Y").to_string(),
    }
}

/// Render a topic series and, when it has two or more buckets, its summary.
pub fn render_trend(plan: &QueryPlan, series: TrendSeries, summary: Option<TrendSummary>, t: &ResponseTemplates) -> Answer {
    let topic = series.topic_terms.join(" or ");
    let (from, to) = (series.from.to_string(), series.to.to_string());
    let total: u64 = series.buckets.iter().map(|b| b.count).sum();
    let text = match &summary {
        Some(s) => {
            let direction = match s.direction {
                Direction::Rising => &t.trend_rising,
                Direction::Falling => &t.trend_falling,
                Direction::Flat => &t.trend_flat,
            };
            let peak_count = series
                .buckets
                .iter()
                .find(|b| b.bucket_start == s.peak_bucket)
                .map_or(0, |b| b.count)
                .to_string();
            fill(
                &t.trend,
                &[
                    ("topic", &topic),
                    ("direction", direction),
                    ("from", &from),
                    ("to", &to),
                    ("peak", &bucket_label(series.scale, s.peak_bucket)),
                    ("peak_count", &peak_count),
                ],
            )
        }
        None => format!("Coverage of {topic} from {from} to {to} counted {total} matching articles."),
    };
    let mut a = Answer::new(AnswerKind::Trend, text);
    a.provenance.plan = Some(canonical_form(plan));
    a.payload = Some(Payload {
        trend: Some(series),
        trend_summary: summary,
        ..Payload::default()
    });
    a
}

pub fn render_persona(plan: &QueryPlan, t: &ResponseTemplates) -> Answer {
    let text = plan
        .persona_key
        .as_deref()
        .and_then(|k| t.persona.get(k))
        .unwrap_or(&t.persona_fallback)
        .clone();
    let mut a = Answer::new(AnswerKind::Persona, text);
    a.provenance.plan = Some(canonical_form(plan));
    a
}

/// What a rejection is about.
#[derive(Debug, Clone, Copy)]
pub enum RejectionInput<'a> {
    Diagnostics(&'a ParseDiagnostics),
    /// A rejected plan and the result of its latest-year counterpart.
    Boundary {
        plan: &'a QueryPlan,
        latest: Option<&'a ExecutionResult>,
    },
    Guardrail(&'a GuardrailVerdict),
    OutputBlocked(&'a GuardrailVerdict),
    Execution {
        plan: &'a QueryPlan,
        error: &'a ExecError,
    },
}

fn category_phrase(c: Category) -> &'static str {
    match c {
        Category::HateSpeech => "hate speech",
        Category::InsultsSexual => "insults or sexual content",
        Category::ThreatsMisconduct => "threats or misconduct",
        Category::Pii => "personal information",
    }
}

/// The same question asked for the latest covered year.
pub fn latest_reference_plan(plan: &QueryPlan) -> Option<QueryPlan> {
    if !plan.is_rejected() || !matches!(plan.intent, Intent::MetricQa | Intent::RankingQa | Intent::Chart) {
        return None;
    }
    let latest = plan.boundary.latest_available;
    let mut p = plan.clone();
    p.time.years = alloc::vec![latest];
    p.boundary = BoundaryOutcome {
        kind: BoundaryKind::InRange,
        effective_years: alloc::vec![latest],
        nearest_available: None,
        latest_available: latest,
    };
    Some(p)
}

/// Render a refusal. Safety rejections name categories and never echo the input.
pub fn render_rejection(input: RejectionInput<'_>, t: &ResponseTemplates) -> Answer {
    match input {
        RejectionInput::Diagnostics(d) => {
            let (reason, mut text) = match d.kind {
                DiagnosticKind::OutOfDomain => {
                    let metrics: Vec<String> = Metric::ALL
                        .iter()
                        .filter(|m| **m != Metric::Rank)
                        .map(|m| m.noun().to_string())
                        .collect();
                    (RejectionReason::OutOfDomain, fill(&t.reject_out_of_domain, &[("metrics", &join_and(&metrics))]))
                }
                DiagnosticKind::UnknownEntity => (RejectionReason::UnknownEntity, t.reject_unknown_entity.clone()),
                DiagnosticKind::OutOfGrammar => (RejectionReason::OutOfGrammar, t.reject_out_of_grammar.clone()),
                DiagnosticKind::BoundaryReject => (RejectionReason::FalsePremise, t.reject_false_premise.clone()),
            };
            if d.kind == DiagnosticKind::UnknownEntity && !d.suggestions.is_empty() {
                let names: Vec<String> = d.suggestions.clone();
                let or = match names.as_slice() {
                    [one] => one.clone(),
                    [init @ .., last] => format!("{} or {last}", init.join(", ")),
                    [] => String::new(),
                };
                text.push_str(&fill(&t.reject_suggestions, &[("suggestions", &or)]));
            }
            let mut a = Answer::rejected(text, reason);
            a.boundary_note = Some(d.message.clone());
            if let Some(r) = a.rejection.as_mut() {
                r.suggestions = d.suggestions.clone();
            }
            a
        }
        RejectionInput::Boundary { plan, latest } => {
            let latest_text = match (latest, latest_reference_plan(plan)) {
                (Some(res), Some(lp)) => render_answer(&lp, res, t).text,
                _ => String::new(),
            };
            let mut a = Answer::rejected(
                fill(&t.reject_boundary, &[("latest", &latest_text)]).trim_end().to_string(),
                RejectionReason::Boundary,
            );
            a.boundary_note = Some(fill(
                &t.reject_boundary_note,
                &[
                    ("requested", &human_years(&plan.time.years)),
                    ("latest_year", &plan.boundary.latest_available.to_string()),
                ],
            ));
            if let Some(res) = latest {
                a.payload = Some(Payload {
                    table: Some(res.table.clone()),
                    ..Payload::default()
                });
                a.provenance.dataset_fingerprint = Some(res.table.provenance.dataset_fingerprint.clone());
            }
            a.provenance.plan = Some(canonical_form(plan));
            a
        }
        RejectionInput::Guardrail(v) => {
            let cats: Vec<String> = v.categories.iter().map(|c| category_phrase(*c).to_string()).collect();
            let mut a = Answer::rejected(
                fill(&t.reject_safety, &[("categories", &join_and(&cats))]),
                RejectionReason::Safety,
            );
            if let Some(r) = a.rejection.as_mut() {
                r.categories = v.categories.iter().copied().collect();
            }
            a
        }
        RejectionInput::OutputBlocked(v) => {
            let mut a = Answer::rejected(t.reject_blocked.clone(), RejectionReason::OutputBlocked);
            if let Some(r) = a.rejection.as_mut() {
                r.categories = v.categories.iter().copied().collect();
            }
            a
        }
        RejectionInput::Execution { plan, error } => {
            let (reason, text) = match error {
                ExecError::EmptyResult => (RejectionReason::EmptyResult, t.reject_empty.clone()),
                _ => (RejectionReason::Execution, t.reject_execution.clone()),
            };
            let mut a = Answer::rejected(text, reason);
            a.boundary_note = Some(error.to_string());
            a.provenance.plan = Some(canonical_form(plan));
            a
        }
    }
}

fn digit_runs(s: &str, out: &mut BTreeSet<String>) {
    let mut cur = String::new();
    for ch in s.chars().chain(core::iter::once(' ')) {
        if ch.is_ascii_digit() {
            cur.push(ch);
        } else if !cur.is_empty() {
            out.insert(core::mem::take(&mut cur));
        }
    }
}

/// Digit sequences in `answer.text` that no payload value accounts for.
///
/// Payload values are taken as formatted for display, together with the
/// plan string recorded in the table provenance.
pub fn unsupported_numbers(answer: &Answer) -> Vec<String> {
    let mut allowed = BTreeSet::new();
    if let Some(p) = &answer.payload {
        if let Some(table) = &p.table {
            digit_runs(&table.provenance.plan, &mut allowed);
            for row in &table.rows {
                for (cell, col) in row.iter().zip(&table.columns) {
                    digit_runs(&format_cell(col.unit, cell), &mut allowed);
                    if col.name == "list" {
                        if let Some(id) = cell.text() {
                            digit_runs(&list_display_name(id), &mut allowed);
                        }
                    }
                }
            }
        }
        if let Some(series) = &p.trend {
            digit_runs(&series.from.to_string(), &mut allowed);
            digit_runs(&series.to.to_string(), &mut allowed);
            for b in &series.buckets {
                digit_runs(&b.bucket_start.to_string(), &mut allowed);
                digit_runs(&b.count.to_string(), &mut allowed);
            }
        }
        if let Some(s) = &p.trend_summary {
            digit_runs(&format_decimal(s.pct_change_first_to_last, 1), &mut allowed);
        }
    }
    let mut found = BTreeSet::new();
    digit_runs(&answer.text, &mut found);
    found.into_iter().filter(|d| !allowed.contains(d)).collect()
}
