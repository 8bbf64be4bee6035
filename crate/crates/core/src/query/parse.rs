use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::grammar::Grammar;
use super::intent::{classify_tokens, list_table, metric_table, persona_table, words, Table};
use super::plan::{Aggregate, ChartType, Grouping, Intent, QueryPlan, TopicSpec, MAX_TOP_K};
use super::scope::{plan_coverage, plan_policy};
use crate::metrics::{resolve_company, Metric, MetricsCatalog, Resolution};
use crate::temporal::{
    clamp_to_coverage, parse_tokens, resolve, Anchor, Basis, BoundaryKind, BoundaryOutcome,
    ResolvedTime, TemporalExpr,
};
use crate::text::{lex, number_word, Token, TokenKind};
use crate::trends::{TrendScale, DEFAULT_WINDOW_YEARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    OutOfGrammar,
    UnknownEntity,
    OutOfDomain,
    BoundaryReject,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::OutOfGrammar => "out_of_grammar",
            DiagnosticKind::UnknownEntity => "unknown_entity",
            DiagnosticKind::OutOfDomain => "out_of_domain",
            DiagnosticKind::BoundaryReject => "boundary_reject",
        }
    }
}

/// Why a query produced no plan. `message` is never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub kind: DiagnosticKind,
    pub message: String,
    pub suggestions: Vec<String>,
}

impl ParseDiagnostics {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> ParseDiagnostics {
        ParseDiagnostics {
            kind,
            message: message.into(),
            suggestions: Vec::new(),
        }
    }

    fn suggest(mut self, suggestions: Vec<String>) -> ParseDiagnostics {
        self.suggestions = suggestions;
        self
    }
}

impl fmt::Display for ParseDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.message)
    }
}

fn supported_metrics() -> Vec<String> {
    Metric::ALL.iter().map(|m| m.noun().to_string()).collect()
}

fn grammar_error(message: impl Into<String>) -> ParseDiagnostics {
    ParseDiagnostics::new(DiagnosticKind::OutOfGrammar, message)
}

struct Lexed<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    mask: Vec<bool>,
}

impl Lexed<'_> {
    fn slice(&self, start: usize, end: usize) -> &str {
        &self.text[self.tokens[start].start..self.tokens[end - 1].end]
    }

    fn has(&self, table: &Table<()>) -> bool {
        table.find(&self.tokens).is_some()
    }
}

/// Parse a query into a plan, or explain why it cannot be answered.
///
/// Relative times resolve against `ref_date`; unspecified times default to
/// the latest covered year.
pub fn parse_query(
    text: &str,
    catalog: &MetricsCatalog,
    ref_date: NaiveDate,
    grammar: &Grammar,
) -> Result<QueryPlan, ParseDiagnostics> {
    let tokens = lex(text);
    if tokens.iter().all(|t| t.kind == TokenKind::Punct) {
        return Err(grammar_error("The query is empty."));
    }
    let intent = classify_tokens(&tokens, grammar);
    let mut q = Lexed {
        text,
        mask: alloc::vec![false; tokens.len()],
        tokens,
    };

    if intent == Intent::Persona {
        let key = persona_table(grammar)
            .find(&q.tokens)
            .map(|h| h.value)
            .unwrap_or_default();
        return Ok(persona_plan(key, ref_date));
    }

    let temporal = parse_tokens(&q.tokens).map_err(|e| grammar_error(format!("Invalid time range: {e}.")))?;
    for &i in &temporal.consumed {
        q.mask[i] = true;
    }

    let lists = list_table(grammar).scan(&q.tokens, &mut q.mask);
    let named: BTreeSet<String> = lists.into_iter().map(|h| h.value).collect();
    if named.len() > 1 {
        return Err(grammar_error("Please ask about one ranking list at a time."));
    }
    let list_id = named.into_iter().next();
    if let Some(l) = &list_id {
        if !catalog.lists.contains_key(l) {
            let known = catalog.lists.values().map(|i| i.display_name.clone()).collect();
            return Err(ParseDiagnostics::new(
                DiagnosticKind::OutOfDomain,
                format!("The {} list is not part of the available data.", catalog.display_name(l)),
            )
            .suggest(known));
        }
    }

    let mut metrics: Vec<Metric> = Vec::new();
    for hit in metric_table(grammar).scan(&q.tokens, &mut q.mask) {
        match hit.value {
            Some(m) if !metrics.contains(&m) => metrics.push(m),
            Some(_) => {}
            None => {
                let phrase = q.slice(hit.start, hit.end).to_lowercase();
                return Err(ParseDiagnostics::new(
                    DiagnosticKind::OutOfDomain,
                    format!("\"{phrase}\" is not a supported metric."),
                )
                .suggest(supported_metrics()));
            }
        }
    }

    if intent == Intent::Trend {
        return trend_plan(&mut q, &temporal.expr, ref_date, grammar);
    }

    let groups = Table::new(grammar.groups.iter().map(|g| (g.phrase.as_str(), g.key))).scan(&q.tokens, &mut q.mask);
    let group = match groups.first() {
        Some(g) => {
            let aggs = Table::new(grammar.aggregates.iter().map(|a| (a.phrase.as_str(), a.aggregate)))
                .scan(&q.tokens, &mut q.mask);
            Some(Grouping {
                key: g.value,
                aggregate: aggs.first().map_or(Aggregate::Sum, |a| a.value),
            })
        }
        None => None,
    };
    let chart_types: Vec<ChartType> = Table::new(grammar.chart_types.iter().map(|c| (c.phrase.as_str(), c.chart_type)))
        .scan(&q.tokens, &mut q.mask)
        .into_iter()
        .map(|h| h.value)
        .collect();

    let (companies, unresolved) = find_companies(&mut q, catalog, grammar);
    let top_k = find_top_k(&q, grammar, companies.is_empty())?;

    check_premise(&q, grammar, catalog, &companies, list_id.as_deref(), &temporal.expr)?;

    let anchor = Anchor::query(ref_date);
    let mut plan = QueryPlan {
        intent,
        companies: Vec::new(),
        list_id: None,
        metrics: Vec::new(),
        time: ResolvedTime::explicit(alloc::vec![ref_date.year()]),
        boundary: in_range(alloc::vec![ref_date.year()], ref_date.year()),
        chart_type: None,
        top_k: None,
        group: None,
        topic: None,
        persona_key: None,
    };

    match intent {
        Intent::MetricQa => {
            if metrics.is_empty() {
                return Err(grammar_error("Which metric should I look up?").suggest(supported_metrics()));
            }
            if metrics.len() > 2 {
                return Err(grammar_error("Ask about at most two metrics at a time."));
            }
            require_companies(&companies, unresolved)?;
            plan.companies = companies;
            plan.list_id = list_id;
            plan.metrics = metrics;
        }
        Intent::RankingQa => {
            plan.metrics = alloc::vec![metrics.first().copied().unwrap_or(Metric::Rank)];
            plan.top_k = Some(top_k.unwrap_or(grammar.default_top_k));
            plan.list_id = list_id.or_else(|| preferred_list(catalog, &[], &temporal.expr, anchor));
        }
        Intent::Chart => {
            if metrics.is_empty() && group.is_some_and(|g| g.aggregate == Aggregate::Count) {
                metrics.push(Metric::Rank);
            }
            if metrics.is_empty() {
                return Err(grammar_error("Which metric should the chart show?").suggest(supported_metrics()));
            }
            if metrics.len() > 2 {
                return Err(grammar_error("A chart can show at most two metrics."));
            }
            if group.is_some() {
                plan.group = group;
            } else if companies.is_empty() && (top_k.is_some() || unresolved.is_empty()) {
                plan.top_k = Some(top_k.unwrap_or(grammar.default_top_k));
            } else {
                require_companies(&companies, unresolved)?;
                if companies.len() > grammar.max_chart_companies {
                    return Err(grammar_error(format!(
                        "A chart can compare at most {} named companies.",
                        grammar.max_chart_companies
                    ))
                    .suggest(alloc::vec![String::from("ask for the top companies instead")]));
                }
                plan.companies = companies;
            }
            plan.list_id = list_id.or_else(|| preferred_list(catalog, &plan.companies, &temporal.expr, anchor));
            let multi_year = preview_years(catalog, &temporal.expr, anchor, plan.list_id.as_deref()) > 1;
            let chart_type = match chart_types.first() {
                Some(&t) => t,
                None if metrics.len() == 2 => ChartType::Scatter,
                None if multi_year => ChartType::Line,
                None => ChartType::Bar,
            };
            if (chart_type == ChartType::Scatter) != (metrics.len() == 2) {
                return Err(grammar_error("Scatter charts compare exactly two metrics; bar and line charts show one."));
            }
            if chart_type == ChartType::Scatter && plan.group.is_some() {
                return Err(grammar_error("Grouped totals can be drawn as bar or line charts."));
            }
            plan.chart_type = Some(chart_type);
            plan.metrics = metrics;
        }
        Intent::Trend | Intent::Persona => unreachable!("handled above"),
    }

    let coverage = plan_coverage(catalog, intent, &plan.companies, plan.list_id.as_deref()).ok_or_else(|| {
        let list = plan.list_id.as_deref().map(|l| catalog.display_name(l)).unwrap_or_default();
        ParseDiagnostics::new(
            DiagnosticKind::BoundaryReject,
            format!("{} does not appear on the {list} list.", plan.companies.join(", ")),
        )
    })?;
    plan.time = resolve(&temporal.expr, anchor, coverage.cutoff_year);
    plan.boundary = clamp_to_coverage(&plan.time, &coverage, plan_policy(intent, &plan.companies));
    debug_assert!(plan.validate().is_ok(), "{:?}", plan.validate());
    plan.validate().map_err(|e| grammar_error(e.0))?;
    Ok(plan)
}

fn in_range(years: Vec<i32>, latest: i32) -> BoundaryOutcome {
    BoundaryOutcome {
        kind: BoundaryKind::InRange,
        effective_years: years,
        nearest_available: None,
        latest_available: latest,
    }
}

pub(crate) fn persona_plan(key: String, ref_date: NaiveDate) -> QueryPlan {
    let year = ref_date.year();
    QueryPlan {
        intent: Intent::Persona,
        companies: Vec::new(),
        list_id: None,
        metrics: Vec::new(),
        time: ResolvedTime {
            years: alloc::vec![year],
            basis: Basis::DefaultedToLatest,
        },
        boundary: in_range(alloc::vec![year], year),
        chart_type: None,
        top_k: None,
        group: None,
        topic: None,
        persona_key: Some(key),
    }
}

/// List used when none is named, chosen for the years the query resolves to
/// against the most preferred list.
fn preferred_list(
    catalog: &MetricsCatalog,
    companies: &[String],
    expr: &TemporalExpr,
    anchor: Anchor,
) -> Option<String> {
    let first = catalog.lists_by_preference().first().map(|s| s.to_string())?;
    let latest = catalog.cutoff_year(&first)?;
    let years = resolve(expr, anchor, latest).years;
    catalog.default_list(companies, &years)
}

fn preview_years(catalog: &MetricsCatalog, expr: &TemporalExpr, anchor: Anchor, list: Option<&str>) -> usize {
    let latest = list.and_then(|l| catalog.cutoff_year(l)).unwrap_or(anchor.date.year());
    resolve(expr, anchor, latest).years.len()
}

fn require_companies(companies: &[String], unresolved: Vec<(String, Vec<String>)>) -> Result<(), ParseDiagnostics> {
    if let Some((name, suggestions)) = unresolved.into_iter().next() {
        return Err(ParseDiagnostics::new(
            DiagnosticKind::UnknownEntity,
            format!("\"{name}\" is not a company in the available rankings."),
        )
        .suggest(suggestions));
    }
    if companies.is_empty() {
        return Err(grammar_error("Which company do you mean?"));
    }
    Ok(())
}

/// Known spellings found verbatim (case-insensitive), plus capitalized
/// word runs grounded through fuzzy resolution. Returns sorted canonical
/// names and the runs that matched nothing, with suggestions.
fn find_companies(
    q: &mut Lexed<'_>,
    catalog: &MetricsCatalog,
    grammar: &Grammar,
) -> (Vec<String>, Vec<(String, Vec<String>)>) {
    let spellings = Table::new(catalog.spellings().map(|(s, c)| (s, c.to_string())));
    let mut found: BTreeSet<String> = spellings
        .scan(&q.tokens, &mut q.mask)
        .into_iter()
        .map(|h| h.value)
        .collect();

    let stop: BTreeSet<&str> = grammar
        .non_entity_words
        .iter()
        .chain(&grammar.topic_stopwords)
        .chain(&grammar.chart_verbs)
        .chain(&grammar.soft_chart_verbs)
        .chain(&grammar.ranking_words)
        .chain(&grammar.membership_verbs)
        .chain(&grammar.singular_nouns)
        .map(String::as_str)
        .collect();
    let capitalized = |t: &Token| {
        t.kind == TokenKind::Word
            && q.text[t.start..].chars().next().is_some_and(char::is_uppercase)
            && !stop.contains(t.norm.as_str())
    };
    let mut unresolved = Vec::new();
    let mut i = 0;
    while i < q.tokens.len() {
        if q.mask[i] || !capitalized(&q.tokens[i]) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < q.tokens.len()
            && !q.mask[j]
            && matches!(q.tokens[j].kind, TokenKind::Word | TokenKind::Number)
            && (capitalized(&q.tokens[j]) || q.tokens[j].kind == TokenKind::Number)
        {
            j += 1;
        }
        let run = q.slice(i, j).to_string();
        match resolve_company(catalog, &run) {
            Resolution::Matched { canonical, .. } => {
                found.insert(canonical);
            }
            Resolution::NoMatch { suggestions } => unresolved.push((run, suggestions)),
        }
        q.mask[i..j].iter_mut().for_each(|m| *m = true);
        i = j;
    }
    (found.into_iter().collect(), unresolved)
}

fn count_token(t: &Token) -> Option<u32> {
    match t.kind {
        TokenKind::Number if t.norm.len() <= 4 => t.norm.parse().ok(),
        TokenKind::Word => number_word(&t.norm),
        _ => None,
    }
}

/// "top 5", "top-5", "5 largest", "10 companies"; a lone superlative with a
/// singular noun ("which company topped") means one.
fn find_top_k(q: &Lexed<'_>, grammar: &Grammar, no_companies: bool) -> Result<Option<u32>, ParseDiagnostics> {
    let ranking: BTreeSet<&str> = grammar.ranking_words.iter().map(String::as_str).collect();
    let plural = ["companies", "firms", "businesses", "corporations"];
    let free: Vec<usize> = (0..q.tokens.len()).filter(|&i| !q.mask[i]).collect();
    let mut k = None;
    for (n, &i) in free.iter().enumerate() {
        let t = &q.tokens[i];
        let next = |step: usize| free.get(n + step).map(|&j| &q.tokens[j]);
        if t.is("top") {
            let candidate = match next(1) {
                Some(d) if d.is("-") => next(2),
                other => other,
            };
            if let Some(v) = candidate.and_then(count_token) {
                k = Some(v);
                break;
            }
        }
        if let Some(v) = count_token(t) {
            if next(1).is_some_and(|w| ranking.contains(w.norm.as_str()) || plural.contains(&w.norm.as_str())) {
                k = Some(v);
                break;
            }
        }
    }
    if k.is_none() && no_companies {
        let superlative = free.iter().any(|&i| ranking.contains(q.tokens[i].norm.as_str()));
        let singular = q.has(&words(&grammar.singular_nouns)) || q.tokens.first().is_some_and(|t| t.is("who"));
        if superlative && singular {
            k = Some(1);
        }
    }
    match k {
        Some(v) if !(1..=MAX_TOP_K).contains(&v) => Err(grammar_error(format!(
            "Rankings can list between 1 and {MAX_TOP_K} companies."
        ))),
        other => Ok(other),
    }
}

/// A query asserting that a company was on a list in a year ("when Acme
/// joined the Global 500 in 2019") is corrected when the data disagrees.
fn check_premise(
    q: &Lexed<'_>,
    grammar: &Grammar,
    catalog: &MetricsCatalog,
    companies: &[String],
    list_id: Option<&str>,
    expr: &TemporalExpr,
) -> Result<(), ParseDiagnostics> {
    let (Some(list), TemporalExpr::AbsoluteYear { year }) = (list_id, expr) else {
        return Ok(());
    };
    if companies.is_empty() || !q.has(&words(&grammar.membership_verbs)) {
        return Ok(());
    }
    let list_years = &catalog.lists[list].years;
    if list_years.binary_search(year).is_err() {
        return Ok(());
    }
    for c in companies {
        let info = &catalog.companies[c];
        if !info.appears(list, *year) {
            let on: Vec<String> = info
                .coverage
                .get(list)
                .map(|ys| ys.iter().map(|y| y.to_string()).collect())
                .unwrap_or_default();
            return Err(ParseDiagnostics::new(
                DiagnosticKind::BoundaryReject,
                format!("{c} is not on the {} list for {year}.", catalog.display_name(list)),
            )
            .suggest(on));
        }
    }
    Ok(())
}

fn trend_plan(
    q: &mut Lexed<'_>,
    expr: &TemporalExpr,
    ref_date: NaiveDate,
    grammar: &Grammar,
) -> Result<QueryPlan, ParseDiagnostics> {
    let scales = Table::new(grammar.scales.iter().map(|s| (s.phrase.as_str(), s.scale))).scan(&q.tokens, &mut q.mask);
    let trend_words = words(&grammar.trend_words);
    trend_words.scan(&q.tokens, &mut q.mask);

    let stop: BTreeSet<&str> = grammar
        .topic_stopwords
        .iter()
        .chain(&grammar.chart_verbs)
        .chain(&grammar.soft_chart_verbs)
        .map(String::as_str)
        .collect();
    let terms: BTreeSet<String> = q
        .tokens
        .iter()
        .zip(&q.mask)
        .filter(|(t, masked)| {
            !**masked
                && t.kind == TokenKind::Word
                && t.norm.chars().count() >= 2
                && t.norm.chars().all(char::is_alphanumeric)
                && !stop.contains(t.norm.as_str())
        })
        .map(|(t, _)| t.norm.clone())
        .collect();
    if terms.is_empty() {
        return Err(grammar_error("Which topic should I follow over time?"));
    }

    let ref_year = ref_date.year();
    let time = match expr {
        TemporalExpr::Unspecified => ResolvedTime {
            years: (ref_year - grammar.default_trend_years as i32 + 1..=ref_year).collect(),
            basis: Basis::DefaultedToLatest,
        },
        other => resolve(other, Anchor::query(ref_date), ref_year),
    };
    let first = *time.years.first().expect("resolved years are non-empty");
    let last = *time.years.last().expect("resolved years are non-empty");
    let (from, to) = match expr {
        TemporalExpr::YearMonth { year, month } => month_bounds(*year, *month),
        _ => (
            NaiveDate::from_ymd_opt(first, 1, 1),
            NaiveDate::from_ymd_opt(last, 12, 31),
        ),
    };
    let (Some(from), Some(to)) = (from, to) else {
        return Err(grammar_error("That time range cannot be expressed as calendar dates."));
    };
    let scale = match scales.first() {
        Some(s) => s.value,
        None if matches!(expr, TemporalExpr::YearMonth { .. }) || time.years.len() == 1 => TrendScale::Month,
        None => TrendScale::Year,
    };
    let mut plan = persona_plan(String::new(), ref_date);
    plan.intent = Intent::Trend;
    plan.persona_key = None;
    // A trend covers one contiguous date range.
    let time = ResolvedTime {
        years: (first..=last).collect(),
        basis: time.basis,
    };
    plan.boundary = in_range(time.years.clone(), ref_year);
    plan.time = time;
    plan.topic = Some(TopicSpec {
        terms: terms.into_iter().collect(),
        scale,
        window_years: if scale == TrendScale::MultiYear { DEFAULT_WINDOW_YEARS } else { 1 },
        from,
        to,
    });
    plan.validate().map_err(|e| grammar_error(e.0))?;
    Ok(plan)
}

fn month_bounds(year: i32, month: u32) -> (Option<NaiveDate>, Option<NaiveDate>) {
    let start = NaiveDate::from_ymd_opt(year, month, 1);
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    (start, next.and_then(|d| d.pred_opt()))
}
