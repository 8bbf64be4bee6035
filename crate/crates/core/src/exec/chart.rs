use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::run::aggregate_column;
use super::table::{Cell, ColumnKind, ResultTable};
use super::ExecError;
use crate::metrics::{list_display_name, Unit};
use crate::query::{Aggregate, ChartType, Intent, QueryPlan};

pub const CHART_SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub field: String,
    pub label: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueAxis {
    pub field: String,
    pub label: String,
    pub kind: ColumnKind,
    pub unit: Option<Unit>,
}

/// A flat record whose keys serialize in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartRow(pub Vec<(String, Cell)>);

impl ChartRow {
    pub fn get(&self, field: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == field).map(|(_, v)| v)
    }
}

impl Serialize for ChartRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ChartRow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RowVisitor;
        impl<'de> Visitor<'de> for RowVisitor {
            type Value = ChartRow;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a flat chart row")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<ChartRow, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Cell>()? {
                    out.push((k, v));
                }
                Ok(ChartRow(out))
            }
        }
        d.deserialize_map(RowVisitor)
    }
}

/// Declarative chart description. Field order is the canonical JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub version: u32,
    pub chart_type: ChartType,
    pub title: String,
    pub x: Axis,
    pub y: ValueAxis,
    pub series_field: Option<String>,
    pub rows: Vec<ChartRow>,
}

impl ChartSpec {
    /// Compact JSON with keys in declaration order and shortest round-trip numbers.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("chart specs always serialize")
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn join_and(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn years_text(years: &[i32]) -> String {
    match years {
        [one] => one.to_string(),
        [first, .., last] => format!("{first}-{last}"),
        [] => String::new(),
    }
}

fn aggregate_word(a: Aggregate) -> &'static str {
    match a {
        Aggregate::Sum => "Total",
        Aggregate::Avg => "Average",
        Aggregate::Min => "Lowest",
        Aggregate::Max => "Highest",
        Aggregate::Count => "Number of companies",
    }
}

fn field_label(field: &str, plan: &QueryPlan) -> String {
    match field {
        "company" => "Company".into(),
        "year" => "Year".into(),
        "sector" => "Sector".into(),
        "country" => "Country".into(),
        _ => {
            if let Some(m) = plan.metrics.iter().find(|m| m.field() == field) {
                return m.label().into();
            }
            match (plan.group, plan.metrics.first()) {
                (Some(g), _) if g.aggregate == Aggregate::Count => aggregate_word(g.aggregate).into(),
                (Some(g), Some(m)) => {
                    let mut label = m.label().to_string();
                    if let Some(first) = label.get_mut(0..1) {
                        first.make_ascii_lowercase();
                    }
                    format!("{} {label}", aggregate_word(g.aggregate))
                }
                _ => field.into(),
            }
        }
    }
}

fn title(plan: &QueryPlan) -> String {
    let list = plan.list_id.as_deref().map(list_display_name).unwrap_or_default();
    let years = years_text(&plan.boundary.effective_years);
    let noun = |i: usize| plan.metrics.get(i).map(|m| m.noun()).unwrap_or_default();
    let subject = if !plan.companies.is_empty() {
        join_and(&plan.companies)
    } else if let Some(k) = plan.top_k {
        format!("the top {k} companies on the {list}")
    } else {
        String::new()
    };
    match (plan.chart_type, plan.group) {
        (_, Some(g)) => {
            let what = match g.aggregate {
                Aggregate::Count => aggregate_word(g.aggregate).to_string(),
                a => format!("{} {}", aggregate_word(a), noun(0)),
            };
            format!("{what} by {} on the {list}, {years}", g.key.as_str())
        }
        (Some(ChartType::Scatter), None) => {
            format!("{} vs. {} for {subject}, {years}", capitalize(noun(0)), noun(1))
        }
        _ => format!("{} of {subject}, {years}", capitalize(noun(0))),
    }
}

/// Compile a chart plan's result table into a [`ChartSpec`].
///
/// Rows with a missing x or y value are left out. Bar rows are sorted by y
/// descending, line rows by (series, year), scatter rows by rank.
pub fn emit_chart_spec(table: &ResultTable, plan: &QueryPlan) -> Result<ChartSpec, ExecError> {
    let invalid = |reason: &str| ExecError::InvalidPlan { reason: reason.into() };
    if plan.intent != Intent::Chart {
        return Err(invalid("not a chart plan"));
    }
    let chart_type = plan.chart_type.ok_or_else(|| invalid("chart plan without chart type"))?;
    let multi_year = plan.boundary.effective_years.len() > 1;
    let metric_field = |i: usize| -> Result<String, ExecError> {
        plan.metrics
            .get(i)
            .map(|m| m.field().to_string())
            .ok_or_else(|| invalid("chart needs more metrics"))
    };
    let y_field = match (plan.group, chart_type) {
        (Some(g), _) => aggregate_column(plan.metrics[0], g).name,
        (None, ChartType::Scatter) => metric_field(1)?,
        (None, _) => metric_field(0)?,
    };
    let (x_field, series) = match (chart_type, plan.group) {
        (ChartType::Bar, Some(g)) => (g.key.as_str().to_string(), multi_year.then(|| "year".to_string())),
        (ChartType::Bar, None) => ("company".to_string(), multi_year.then(|| "year".to_string())),
        (ChartType::Line, Some(g)) => ("year".to_string(), Some(g.key.as_str().to_string())),
        (ChartType::Line, None) => {
            let many = plan.companies.len() > 1 || plan.top_k.is_some();
            ("year".to_string(), many.then(|| "company".to_string()))
        }
        (ChartType::Scatter, Some(_)) => return Err(invalid("scatter charts cannot be grouped")),
        (ChartType::Scatter, None) => (metric_field(0)?, multi_year.then(|| "year".to_string())),
    };

    let index = |field: &str| {
        table.column_index(field).ok_or_else(|| ExecError::ColumnAbsent {
            column: field.to_string(),
        })
    };
    let (xi, yi) = (index(&x_field)?, index(&y_field)?);
    let si = series.as_deref().map(index).transpose()?;
    let expected_x = match chart_type {
        ChartType::Bar => ColumnKind::Categorical,
        ChartType::Line => ColumnKind::Temporal,
        ChartType::Scatter => ColumnKind::Quantitative,
    };
    if table.columns[xi].kind != expected_x {
        return Err(invalid("x column has the wrong kind for this chart type"));
    }
    let label_field = (chart_type == ChartType::Scatter).then(|| index("company")).transpose()?;
    let rank_index = index("rank").ok();

    let mut picked: Vec<&Vec<Cell>> = table
        .rows
        .iter()
        .filter(|r| !r[xi].is_missing() && !r[yi].is_missing())
        .collect();
    let series_cmp = |a: &Vec<Cell>, b: &Vec<Cell>| match si {
        Some(s) => a[s].total_cmp(&b[s]),
        None => core::cmp::Ordering::Equal,
    };
    match chart_type {
        ChartType::Bar => picked.sort_by(|a, b| {
            b[yi].total_cmp(&a[yi])
                .then_with(|| a[xi].total_cmp(&b[xi]))
                .then_with(|| series_cmp(a, b))
        }),
        ChartType::Line => picked.sort_by(|a, b| series_cmp(a, b).then_with(|| a[xi].total_cmp(&b[xi]))),
        ChartType::Scatter => {
            let ri = rank_index.ok_or_else(|| ExecError::ColumnAbsent { column: "rank".into() })?;
            let ci = label_field.unwrap_or(xi);
            picked.sort_by(|a, b| {
                a[ri].total_cmp(&b[ri])
                    .then_with(|| series_cmp(a, b))
                    .then_with(|| a[ci].total_cmp(&b[ci]))
            })
        }
    }

    let rows = picked
        .into_iter()
        .map(|r| {
            let mut fields = alloc::vec![
                (x_field.clone(), r[xi].clone()),
                (y_field.clone(), r[yi].clone()),
            ];
            if let (Some(name), Some(s)) = (&series, si) {
                fields.push((name.clone(), r[s].clone()));
            }
            if let Some(c) = label_field {
                fields.push(("company".to_string(), r[c].clone()));
            }
            ChartRow(fields)
        })
        .collect();

    Ok(ChartSpec {
        version: CHART_SPEC_VERSION,
        chart_type,
        title: title(plan),
        x: crate::exec::Axis {
            label: field_label(&x_field, plan),
            field: x_field,
            kind: expected_x,
        },
        y: ValueAxis {
            label: field_label(&y_field, plan),
            kind: table.columns[yi].kind,
            unit: table.columns[yi].unit,
            field: y_field,
        },
        series_field: series,
        rows,
    })
}
