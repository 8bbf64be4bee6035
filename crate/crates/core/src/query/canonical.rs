//! Single-line plan serialization, e.g.
//! `chart bar list=g500 metrics=revenue companies=Apple,Google,Nvidia years=2024`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use chrono::{Datelike, NaiveDate};

use super::plan::{Aggregate, ChartType, GroupKey, Grouping, Intent, QueryPlan, TopicSpec};
use super::scope::plan_coverage;
use crate::metrics::{Metric, MetricsCatalog};
use crate::temporal::{Basis, BoundaryKind, BoundaryOutcome, ResolvedTime};
use crate::trends::TrendScale;

/// `2015..2018,2020`: ascending years with contiguous runs collapsed.
pub fn format_years(years: &[i32]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < years.len() {
        let mut j = i;
        while j + 1 < years.len() && years[j + 1] == years[j] + 1 {
            j += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        if j > i {
            let _ = write!(out, "{}..{}", years[i], years[j]);
        } else {
            let _ = write!(out, "{}", years[i]);
        }
        i = j + 1;
    }
    out
}

pub fn parse_years(s: &str) -> Option<Vec<i32>> {
    let mut out: Vec<i32> = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (i32, i32) = (a.parse().ok()?, b.parse().ok()?);
                if a > b {
                    return None;
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().ok()?),
        }
    }
    let sorted = out.windows(2).all(|w| w[0] < w[1]);
    (sorted && !out.is_empty()).then_some(out)
}

fn escape(name: &str) -> String {
    name.replace('\\', "\\\\").replace(',', "\\,")
}

fn split_escaped(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            ',' => out.push(core::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn join_names(names: &[String]) -> String {
    names.iter().map(|n| escape(n)).collect::<Vec<_>>().join(",")
}

fn join_metrics(metrics: &[Metric]) -> String {
    metrics.iter().map(|m| m.id()).collect::<Vec<_>>().join(",")
}

fn push_time(out: &mut String, plan: &QueryPlan) {
    let _ = write!(out, " years={}", format_years(&plan.time.years));
    let b = &plan.boundary;
    match b.kind {
        BoundaryKind::InRange if b.effective_years != plan.time.years => {
            let _ = write!(out, " effective={}", format_years(&b.effective_years));
        }
        BoundaryKind::InRange => {}
        BoundaryKind::Redirect => {
            let _ = write!(out, " redirect={}", format_years(&b.effective_years));
        }
        BoundaryKind::Reject => {
            let _ = write!(out, " reject latest={}", b.latest_available);
        }
    }
    push_basis(out, plan.time.basis);
}

fn push_basis(out: &mut String, basis: Basis) {
    match basis {
        Basis::Explicit => {}
        Basis::DefaultedToLatest => out.push_str(" basis=latest"),
        Basis::DocumentAnchored => out.push_str(" basis=doc"),
    }
}

/// Deterministic single-line serialization. Companies are already sorted in
/// a valid plan, so plans differing only in mention order serialize equally.
pub fn canonical_form(plan: &QueryPlan) -> String {
    let mut out = String::new();
    match plan.intent {
        Intent::MetricQa => {
            out.push_str("metric");
            if let Some(l) = &plan.list_id {
                let _ = write!(out, " list={l}");
            }
            let _ = write!(
                out,
                " company={} metric={}",
                join_names(&plan.companies),
                join_metrics(&plan.metrics)
            );
            push_time(&mut out, plan);
        }
        Intent::RankingQa => {
            let _ = write!(
                out,
                "ranking list={} metric={} top={}",
                plan.list_id.as_deref().unwrap_or(""),
                join_metrics(&plan.metrics),
                plan.top_k.unwrap_or(0)
            );
            push_time(&mut out, plan);
        }
        Intent::Chart => {
            let _ = write!(
                out,
                "chart {} list={} metrics={}",
                plan.chart_type.map_or("", ChartType::as_str),
                plan.list_id.as_deref().unwrap_or(""),
                join_metrics(&plan.metrics)
            );
            if !plan.companies.is_empty() {
                let _ = write!(out, " companies={}", join_names(&plan.companies));
            }
            if let Some(k) = plan.top_k {
                let _ = write!(out, " top={k}");
            }
            if let Some(g) = plan.group {
                let _ = write!(out, " group={}:{}", g.key.as_str(), g.aggregate.as_str());
            }
            push_time(&mut out, plan);
        }
        Intent::Trend => {
            if let Some(t) = &plan.topic {
                let _ = write!(out, "trend topic={} scale={}", t.terms.join(","), t.scale.as_str());
                if t.scale == TrendScale::MultiYear {
                    let _ = write!(out, ":{}", t.window_years);
                }
                let _ = write!(out, " from={} to={}", t.from, t.to);
            }
            push_basis(&mut out, plan.time.basis);
        }
        Intent::Persona => {
            let _ = write!(out, "persona key={}", plan.persona_key.as_deref().unwrap_or(""));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalError(pub String);

impl fmt::Display for CanonicalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad canonical plan: {}", self.0)
    }
}

const KEYS: [&str; 15] = [
    "list", "company", "companies", "metric", "metrics", "top", "group", "years", "effective",
    "redirect", "latest", "basis", "topic", "scale", "key",
];

/// Split `k=v` fields. Values may hold spaces, so a field ends only where
/// the next known key starts.
fn fields(s: &str) -> Result<Vec<(&str, &str)>, CanonicalError> {
    let mut starts: Vec<(usize, &str)> = Vec::new();
    for (i, _) in s.match_indices(' ') {
        let rest = &s[i + 1..];
        if let Some(k) = KEYS.iter().chain(["from", "to"].iter()).find(|k| {
            rest.strip_prefix(**k).is_some_and(|r| r.starts_with('='))
        }) {
            starts.push((i + 1, k));
        }
    }
    let mut out = Vec::new();
    for (n, (start, key)) in starts.iter().enumerate() {
        let value_start = start + key.len() + 1;
        let end = starts.get(n + 1).map_or(s.len(), |(next, _)| next - 1);
        let value = s[value_start..end].trim_end_matches(" reject");
        out.push((*key, value));
    }
    Ok(out)
}

fn err<T>(m: &str) -> Result<T, CanonicalError> {
    Err(CanonicalError(m.into()))
}

/// Inverse of [`canonical_form`]. Needs the catalog for the coverage cutoff
/// and the reference date for plans without dataset years.
pub fn parse_canonical(
    s: &str,
    catalog: &MetricsCatalog,
    ref_date: NaiveDate,
) -> Result<QueryPlan, CanonicalError> {
    let s = s.trim();
    let head = s.split(' ').next().unwrap_or("");
    let intent = match head {
        "metric" => Intent::MetricQa,
        "ranking" => Intent::RankingQa,
        "chart" => Intent::Chart,
        "trend" => Intent::Trend,
        "persona" => Intent::Persona,
        _ => return err("unknown head word"),
    };
    let chart_type = if intent == Intent::Chart {
        let word = s.split(' ').nth(1).unwrap_or("");
        Some(ChartType::from_str(word).ok_or_else(|| CanonicalError("unknown chart type".into()))?)
    } else {
        None
    };
    let rejected = s.contains(" reject latest=");
    let fs = fields(s)?;
    let get = |k: &str| fs.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);

    let ref_year = ref_date.year();
    let mut plan = QueryPlan {
        intent,
        companies: Vec::new(),
        list_id: get("list").map(str::to_string),
        metrics: Vec::new(),
        time: ResolvedTime::explicit(alloc::vec![ref_year]),
        boundary: BoundaryOutcome {
            kind: BoundaryKind::InRange,
            effective_years: alloc::vec![ref_year],
            nearest_available: None,
            latest_available: ref_year,
        },
        chart_type,
        top_k: None,
        group: None,
        topic: None,
        persona_key: None,
    };
    let basis = match get("basis") {
        None => Basis::Explicit,
        Some("latest") => Basis::DefaultedToLatest,
        Some("doc") => Basis::DocumentAnchored,
        Some(_) => return err("unknown basis"),
    };

    match intent {
        Intent::Persona => {
            plan.persona_key = Some(get("key").ok_or_else(|| CanonicalError("missing key".into()))?.into());
            plan.time.basis = Basis::DefaultedToLatest;
            return Ok(plan);
        }
        Intent::Trend => {
            let terms: Vec<String> = get("topic").unwrap_or("").split(',').filter(|t| !t.is_empty()).map(str::to_string).collect();
            let scale_field = get("scale").unwrap_or("");
            let (scale_name, window) = match scale_field.split_once(':') {
                Some((a, w)) => (a, w.parse().map_err(|_| CanonicalError("bad window".into()))?),
                None => (scale_field, 1),
            };
            let scale = TrendScale::from_str(scale_name).ok_or_else(|| CanonicalError("unknown scale".into()))?;
            let date = |k: &str| {
                get(k)
                    .and_then(|v| NaiveDate::parse_from_str(v, "%Y-%m-%d").ok())
                    .ok_or_else(|| CanonicalError("bad date".into()))
            };
            let (from, to) = (date("from")?, date("to")?);
            if from > to {
                return err("from after to");
            }
            let years: Vec<i32> = (from.year()..=to.year()).collect();
            plan.time = ResolvedTime { years: years.clone(), basis };
            plan.boundary.effective_years = years;
            plan.topic = Some(TopicSpec {
                terms,
                scale,
                window_years: window,
                from,
                to,
            });
            plan.validate().map_err(|e| CanonicalError(e.0))?;
            return Ok(plan);
        }
        _ => {}
    }

    let names = get(if intent == Intent::MetricQa { "company" } else { "companies" });
    if let Some(v) = names {
        plan.companies = split_escaped(v);
    }
    let metric_field = get(if intent == Intent::Chart { "metrics" } else { "metric" }).unwrap_or("");
    for id in metric_field.split(',') {
        plan.metrics.push(Metric::from_id(id).ok_or_else(|| CanonicalError("unknown metric".into()))?);
    }
    if let Some(k) = get("top") {
        plan.top_k = Some(k.parse().map_err(|_| CanonicalError("bad top".into()))?);
    }
    if let Some(g) = get("group") {
        let (key, agg) = g.split_once(':').ok_or_else(|| CanonicalError("bad group".into()))?;
        plan.group = Some(Grouping {
            key: GroupKey::from_str(key).ok_or_else(|| CanonicalError("bad group key".into()))?,
            aggregate: Aggregate::from_str(agg).ok_or_else(|| CanonicalError("bad aggregate".into()))?,
        });
    }
    let years = get("years").and_then(parse_years).ok_or_else(|| CanonicalError("bad years".into()))?;
    plan.time = ResolvedTime { years: years.clone(), basis };

    let coverage = plan_coverage(catalog, intent, &plan.companies, plan.list_id.as_deref());
    plan.boundary = if rejected {
        let latest = get("latest").and_then(|v| v.parse().ok()).ok_or_else(|| CanonicalError("bad latest".into()))?;
        BoundaryOutcome {
            kind: BoundaryKind::Reject,
            effective_years: Vec::new(),
            nearest_available: None,
            latest_available: latest,
        }
    } else {
        let coverage = coverage.ok_or_else(|| CanonicalError("plan outside the catalog".into()))?;
        match get("redirect") {
            Some(v) => {
                let to: i32 = v.parse().map_err(|_| CanonicalError("bad redirect".into()))?;
                BoundaryOutcome {
                    kind: BoundaryKind::Redirect,
                    effective_years: alloc::vec![to],
                    nearest_available: Some(to),
                    latest_available: coverage.cutoff_year,
                }
            }
            None => BoundaryOutcome {
                kind: BoundaryKind::InRange,
                effective_years: match get("effective") {
                    Some(v) => parse_years(v).ok_or_else(|| CanonicalError("bad effective".into()))?,
                    None => years,
                },
                nearest_available: None,
                latest_available: coverage.cutoff_year,
            },
        }
    };
    plan.validate().map_err(|e| CanonicalError(e.0))?;
    Ok(plan)
}
