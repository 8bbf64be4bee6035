use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::metrics::Metric;
use crate::temporal::{BoundaryKind, BoundaryOutcome, ResolvedTime};
use crate::trends::TrendScale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    MetricQa,
    RankingQa,
    Chart,
    Trend,
    Persona,
}

impl Intent {
    pub fn as_str(self) -> &'static str {
        match self {
            Intent::MetricQa => "metric_qa",
            Intent::RankingQa => "ranking_qa",
            Intent::Chart => "chart",
            Intent::Trend => "trend",
            Intent::Persona => "persona",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Line,
    Scatter,
}

impl ChartType {
    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Scatter => "scatter",
        }
    }

    pub fn from_str(s: &str) -> Option<ChartType> {
        [ChartType::Bar, ChartType::Line, ChartType::Scatter]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Sector,
    Country,
}

impl GroupKey {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKey::Sector => "sector",
            GroupKey::Country => "country",
        }
    }

    pub fn from_str(s: &str) -> Option<GroupKey> {
        [GroupKey::Sector, GroupKey::Country]
            .into_iter()
            .find(|g| g.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Sum,
    Avg,
    Count,
    Min,
    Max,
}

impl Aggregate {
    pub const ALL: [Aggregate; 5] = [
        Aggregate::Sum,
        Aggregate::Avg,
        Aggregate::Count,
        Aggregate::Min,
        Aggregate::Max,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregate::Sum => "sum",
            Aggregate::Avg => "avg",
            Aggregate::Count => "count",
            Aggregate::Min => "min",
            Aggregate::Max => "max",
        }
    }

    pub fn from_str(s: &str) -> Option<Aggregate> {
        Aggregate::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub key: GroupKey,
    pub aggregate: Aggregate,
}

/// What a trend plan counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSpec {
    /// Lowercase, sorted, unique.
    pub terms: Vec<String>,
    pub scale: TrendScale,
    /// Window length for `multi_year`; 1 otherwise.
    pub window_years: u32,
    pub from: NaiveDate,
    pub to: NaiveDate,
}

/// Structured query produced by the parser and consumed by the executor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub intent: Intent,
    /// Canonical names, sorted, unique.
    pub companies: Vec<String>,
    /// `None` means "whichever list holds the company" (metric questions only).
    pub list_id: Option<String>,
    pub metrics: Vec<Metric>,
    pub time: ResolvedTime,
    pub boundary: BoundaryOutcome,
    pub chart_type: Option<ChartType>,
    pub top_k: Option<u32>,
    pub group: Option<Grouping>,
    pub topic: Option<TopicSpec>,
    pub persona_key: Option<String>,
}

pub const MAX_TOP_K: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanError(pub String);

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl QueryPlan {
    /// The metric ordering rows and `top_k` selection.
    pub fn primary_metric(&self) -> Option<Metric> {
        self.metrics.first().copied()
    }

    pub fn is_rejected(&self) -> bool {
        self.boundary.kind == BoundaryKind::Reject
    }

    /// Check every structural invariant of a plan.
    pub fn validate(&self) -> Result<(), PlanError> {
        let fail = |m: &str| Err(PlanError(m.into()));
        if self.companies.windows(2).any(|w| w[0] >= w[1]) {
            return fail("companies must be sorted and unique");
        }
        if self.time.years.is_empty() || self.time.years.windows(2).any(|w| w[0] >= w[1]) {
            return fail("resolved years must be non-empty and strictly ascending");
        }
        if (self.boundary.kind == BoundaryKind::Reject) != self.boundary.effective_years.is_empty() {
            return fail("effective years are empty exactly when rejected");
        }
        if let Some(k) = self.top_k {
            if !(1..=MAX_TOP_K).contains(&k) {
                return fail("top_k must be within 1..=100");
            }
        }
        let needs_metrics = matches!(self.intent, Intent::MetricQa | Intent::RankingQa | Intent::Chart);
        if needs_metrics && !(1..=2).contains(&self.metrics.len()) {
            return fail("one or two metrics required");
        }
        if !needs_metrics && !self.metrics.is_empty() {
            return fail("metrics only apply to metric, ranking and chart plans");
        }
        if self.metrics.len() == 2 && self.metrics[0] == self.metrics[1] {
            return fail("metrics must differ");
        }
        match self.intent {
            Intent::Chart => {
                let Some(ct) = self.chart_type else {
                    return fail("chart plan without chart type");
                };
                if (ct == ChartType::Scatter) != (self.metrics.len() == 2) {
                    return fail("scatter charts take exactly two metrics, others one");
                }
                if self.list_id.is_none() {
                    return fail("chart plan without list");
                }
                if self.group.is_some() {
                    if ct == ChartType::Scatter || !self.companies.is_empty() || self.top_k.is_some() {
                        return fail("grouping applies to whole-list bar or line charts");
                    }
                } else if self.companies.is_empty() == self.top_k.is_none() {
                    return fail("chart selects either companies or top_k");
                }
            }
            Intent::RankingQa => {
                if self.top_k.is_none() || self.list_id.is_none() || !self.companies.is_empty() {
                    return fail("ranking plan needs a list and top_k and no companies");
                }
            }
            Intent::MetricQa => {
                if self.companies.is_empty() || self.top_k.is_some() || self.group.is_some() {
                    return fail("metric plan needs companies and no top_k or grouping");
                }
            }
            Intent::Trend => {
                let Some(t) = &self.topic else {
                    return fail("trend plan without topic");
                };
                if t.terms.is_empty() || t.from > t.to {
                    return fail("trend plan needs terms and from <= to");
                }
            }
            Intent::Persona => {
                if self.persona_key.is_none() {
                    return fail("persona plan without key");
                }
            }
        }
        if self.intent != Intent::Chart && self.chart_type.is_some() {
            return fail("chart type on a non-chart plan");
        }
        if self.intent != Intent::Chart && self.group.is_some() {
            return fail("grouping on a non-chart plan");
        }
        Ok(())
    }
}
