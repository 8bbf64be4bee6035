use alloc::string::{String, ToString};
use core::fmt;

use serde::{Deserialize, Serialize};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

/// The closed set of metrics a query may ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Revenue,
    Profits,
    Assets,
    MarketValue,
    Employees,
    RevenueChangePct,
    Eps,
    Rank,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Revenue,
        Metric::Profits,
        Metric::Assets,
        Metric::MarketValue,
        Metric::Employees,
        Metric::RevenueChangePct,
        Metric::Eps,
        Metric::Rank,
    ];

    /// Identifier used in canonical plan strings.
    pub fn id(self) -> &'static str {
        match self {
            Metric::Revenue => "revenue",
            Metric::Profits => "profits",
            Metric::Assets => "assets",
            Metric::MarketValue => "market_value",
            Metric::Employees => "employees",
            Metric::RevenueChangePct => "revenue_change_pct",
            Metric::Eps => "eps",
            Metric::Rank => "rank",
        }
    }

    pub fn from_id(id: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.id() == id)
    }

    /// Column name in the CSV header, also used as the chart field name.
    pub fn field(self) -> &'static str {
        match self {
            Metric::Revenue => "revenue_musd",
            Metric::Profits => "profits_musd",
            Metric::Assets => "assets_musd",
            Metric::MarketValue => "market_value_musd",
            Metric::Employees => "employees",
            Metric::RevenueChangePct => "revenue_change_pct",
            Metric::Eps => "eps",
            Metric::Rank => "rank",
        }
    }

    /// Human wording used in rendered answers.
    pub fn noun(self) -> &'static str {
        match self {
            Metric::Revenue => "revenue",
            Metric::Profits => "profits",
            Metric::Assets => "assets",
            Metric::MarketValue => "market value",
            Metric::Employees => "number of employees",
            Metric::RevenueChangePct => "year-over-year revenue change",
            Metric::Eps => "earnings per share",
            Metric::Rank => "rank",
        }
    }

    pub fn noun_is_plural(self) -> bool {
        matches!(self, Metric::Profits | Metric::Assets)
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Revenue => "Revenue (USD millions)",
            Metric::Profits => "Profits (USD millions)",
            Metric::Assets => "Assets (USD millions)",
            Metric::MarketValue => "Market value (USD millions)",
            Metric::Employees => "Employees",
            Metric::RevenueChangePct => "Revenue change (%)",
            Metric::Eps => "Earnings per share (USD)",
            Metric::Rank => "Rank",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            Metric::Revenue | Metric::Profits | Metric::Assets | Metric::MarketValue => {
                Unit::MillionsUsd
            }
            Metric::Employees => Unit::Headcount,
            Metric::RevenueChangePct => Unit::Percent,
            Metric::Eps => Unit::UsdPerShare,
            Metric::Rank => Unit::Rank,
        }
    }

    /// Integer-valued metrics are stored and emitted as integers.
    pub fn is_integer(self) -> bool {
        matches!(self, Metric::Employees | Metric::Rank)
    }

    /// Whether a larger value ranks higher when ordering by this metric.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Rank)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    MillionsUsd,
    Headcount,
    Percent,
    UsdPerShare,
    Rank,
    Companies,
    Year,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::MillionsUsd => "USD millions",
            Unit::Headcount => "employees",
            Unit::Percent => "percent",
            Unit::UsdPerShare => "USD per share",
            Unit::Rank => "rank",
            Unit::Companies => "companies",
            Unit::Year => "year",
        }
    }
}

/// A numeric cell value; integers stay integers so they render without decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Real(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(v) => v as f64,
            Number::Real(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub metric: Metric,
    pub value: Number,
    pub unit: Unit,
}

/// One row of a ranking list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanyRecord {
    pub list_id: String,
    pub year: i32,
    pub rank: u32,
    pub company: String,
    pub founded: Option<i32>,
    pub sector: String,
    pub industry: String,
    pub country: String,
    pub region: String,
    pub revenue: Option<f64>,
    pub revenue_change_pct: Option<f64>,
    pub profits: Option<f64>,
    pub assets: Option<f64>,
    pub market_value: Option<f64>,
    pub employees: Option<u64>,
    pub eps: Option<f64>,
}

impl CompanyRecord {
    /// The stored value for `metric`, or `None` when the cell is missing.
    pub fn metric(&self, metric: Metric) -> Option<Number> {
        let real = |v: Option<f64>| v.map(Number::Real);
        match metric {
            Metric::Revenue => real(self.revenue),
            Metric::Profits => real(self.profits),
            Metric::Assets => real(self.assets),
            Metric::MarketValue => real(self.market_value),
            Metric::Employees => self.employees.map(|e| Number::Int(e as i64)),
            Metric::RevenueChangePct => real(self.revenue_change_pct),
            Metric::Eps => real(self.eps),
            Metric::Rank => Some(Number::Int(self.rank as i64)),
        }
    }

    /// Row-level invariants; cross-row uniqueness is checked by the dataset.
    pub fn validate(&self) -> Result<(), RecordIssue> {
        if self.list_id.trim().is_empty() {
            return Err(RecordIssue::new("empty list_id"));
        }
        if self.company.trim().is_empty() {
            return Err(RecordIssue::new("empty company"));
        }
        if self.rank == 0 {
            return Err(RecordIssue::new("rank must be >= 1"));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(RecordIssue::new("year out of range [1900, 2100]"));
        }
        if let Some(founded) = self.founded {
            if founded > self.year {
                return Err(RecordIssue::new("founded is after the list year"));
            }
        }
        let money = [
            ("revenue_musd", self.revenue),
            ("revenue_change_pct", self.revenue_change_pct),
            ("profits_musd", self.profits),
            ("assets_musd", self.assets),
            ("market_value_musd", self.market_value),
            ("eps", self.eps),
        ];
        for (name, value) in money {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(RecordIssue {
                        message: alloc::format!("{name} is not a finite number"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordIssue {
    pub message: String,
}

impl RecordIssue {
    pub fn new(message: &str) -> Self {
        Self {
            message: message.to_string(),
        }
    }
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
