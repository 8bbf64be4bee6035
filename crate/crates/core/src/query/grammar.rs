//! Keyword tables driving the query grammar. The `falm` crate loads these
//! from a TOML file; [`Grammar::default`] is the shipped table.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::plan::{Aggregate, ChartType, GroupKey};
use crate::metrics::Metric;
use crate::trends::TrendScale;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricPhrase {
    pub phrase: String,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListPhrase {
    pub phrase: String,
    pub list_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartTypePhrase {
    pub phrase: String,
    pub chart_type: ChartType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaPhrase {
    pub phrase: String,
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPhrase {
    pub phrase: String,
    pub key: GroupKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatePhrase {
    pub phrase: String,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePhrase {
    pub phrase: String,
    pub scale: TrendScale,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar {
    pub version: u32,
    pub default_top_k: u32,
    pub max_chart_companies: usize,
    /// Years covered by a trend query that names no time.
    pub default_trend_years: u32,
    pub metrics: Vec<MetricPhrase>,
    /// Metric words outside the dataset ("stock price").
    pub unsupported_metrics: Vec<String>,
    pub lists: Vec<ListPhrase>,
    /// Words that always make a chart request.
    pub chart_verbs: Vec<String>,
    /// Words that make a chart request only when a metric is mentioned.
    pub soft_chart_verbs: Vec<String>,
    pub chart_types: Vec<ChartTypePhrase>,
    pub ranking_words: Vec<String>,
    /// Superlatives asking for a single winner when used with a singular noun.
    pub singular_nouns: Vec<String>,
    pub trend_words: Vec<String>,
    pub persona: Vec<PersonaPhrase>,
    pub groups: Vec<GroupPhrase>,
    pub aggregates: Vec<AggregatePhrase>,
    pub scales: Vec<ScalePhrase>,
    /// Verbs asserting list membership ("joined"), checked as premises.
    pub membership_verbs: Vec<String>,
    /// Capitalized words that never start a company name.
    pub non_entity_words: Vec<String>,
    pub topic_stopwords: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for Grammar {
    fn default() -> Self {
        use Metric::*;
        let metric = |phrase: &str, metric| MetricPhrase {
            phrase: phrase.into(),
            metric,
        };
        let list = |phrase: &str, id: &str| ListPhrase {
            phrase: phrase.into(),
            list_id: id.into(),
        };
        let chart = |phrase: &str, chart_type| ChartTypePhrase {
            phrase: phrase.into(),
            chart_type,
        };
        let persona = |phrase: &str, key: &str| PersonaPhrase {
            phrase: phrase.into(),
            key: key.into(),
        };
        let group = |phrase: &str, key| GroupPhrase {
            phrase: phrase.into(),
            key,
        };
        let agg = |phrase: &str, aggregate| AggregatePhrase {
            phrase: phrase.into(),
            aggregate,
        };
        let scale = |phrase: &str, scale| ScalePhrase {
            phrase: phrase.into(),
            scale,
        };
        Grammar {
            version: 1,
            default_top_k: 10,
            max_chart_companies: 10,
            default_trend_years: 5,
            metrics: alloc::vec![
                metric("revenue", Revenue),
                metric("revenues", Revenue),
                metric("sales", Revenue),
                metric("turnover", Revenue),
                metric("revenue growth", RevenueChangePct),
                metric("revenue change", RevenueChangePct),
                metric("growth in revenue", RevenueChangePct),
                metric("change in revenue", RevenueChangePct),
                metric("year-over-year revenue change", RevenueChangePct),
                metric("profit", Profits),
                metric("profits", Profits),
                metric("net income", Profits),
                metric("income", Profits),
                metric("earnings", Profits),
                metric("assets", Assets),
                metric("total assets", Assets),
                metric("market value", MarketValue),
                metric("market cap", MarketValue),
                metric("market capitalization", MarketValue),
                metric("market capitalisation", MarketValue),
                metric("valuation", MarketValue),
                metric("employees", Employees),
                metric("number of employees", Employees),
                metric("employee count", Employees),
                metric("headcount", Employees),
                metric("workforce", Employees),
                metric("staff", Employees),
                metric("eps", Eps),
                metric("earnings per share", Eps),
                metric("rank", Rank),
                metric("ranking", Rank),
                metric("position", Rank),
            ],
            unsupported_metrics: strings(&[
                "stock price",
                "share price",
                "stock prices",
                "price",
                "dividend",
                "dividends",
                "debt",
                "ebitda",
                "cash flow",
                "free cash flow",
                "profit margin",
                "margin",
                "salary",
                "ceo pay",
                "p/e ratio",
                "pe ratio",
                "credit rating",
            ]),
            lists: alloc::vec![
                list("global 500", "g500"),
                list("fortune global 500", "g500"),
                list("g500", "g500"),
                list("fortune 1000", "f1000"),
                list("f1000", "f1000"),
                list("fortune 500", "f500"),
                list("f500", "f500"),
            ],
            chart_verbs: strings(&[
                "plot", "plotting", "chart", "graph", "draw", "visualize", "visualise",
                "visualization", "visualisation", "scatter", "scatterplot", "diagram",
            ]),
            soft_chart_verbs: strings(&["show", "display", "compare", "comparing", "illustrate"]),
            chart_types: alloc::vec![
                chart("bar chart", ChartType::Bar),
                chart("bar graph", ChartType::Bar),
                chart("bar plot", ChartType::Bar),
                chart("bars", ChartType::Bar),
                chart("line chart", ChartType::Line),
                chart("line graph", ChartType::Line),
                chart("line plot", ChartType::Line),
                chart("trend line", ChartType::Line),
                chart("scatter", ChartType::Scatter),
                chart("scatter plot", ChartType::Scatter),
                chart("scatterplot", ChartType::Scatter),
            ],
            ranking_words: strings(&[
                "top", "largest", "biggest", "topped", "leading", "highest", "lowest",
                "smallest", "most", "best",
            ]),
            singular_nouns: strings(&["company", "firm", "business", "corporation"]),
            trend_words: strings(&[
                "trend", "trends", "evolved", "evolve", "evolving", "changed", "shifted",
                "over time", "coverage", "view on", "views on", "discussed", "attention",
                "landscape",
            ]),
            persona: alloc::vec![
                persona("who are you", "identity"),
                persona("what are you", "identity"),
                persona("your name", "identity"),
                persona("are you an ai", "identity"),
                persona("are you a human", "identity"),
                persona("about yourself", "identity"),
                persona("your programming", "principles"),
                persona("philosophical principles", "principles"),
                persona("your values", "principles"),
                persona("your principles", "principles"),
                persona("who created you", "creator"),
                persona("who built you", "creator"),
                persona("who made you", "creator"),
                persona("who trained you", "creator"),
                persona("what can you do", "capabilities"),
                persona("your capabilities", "capabilities"),
                persona("how can you help", "capabilities"),
            ],
            groups: alloc::vec![
                group("by sector", GroupKey::Sector),
                group("per sector", GroupKey::Sector),
                group("each sector", GroupKey::Sector),
                group("across sectors", GroupKey::Sector),
                group("by country", GroupKey::Country),
                group("per country", GroupKey::Country),
                group("each country", GroupKey::Country),
                group("across countries", GroupKey::Country),
            ],
            aggregates: alloc::vec![
                agg("total", Aggregate::Sum),
                agg("sum", Aggregate::Sum),
                agg("combined", Aggregate::Sum),
                agg("aggregate", Aggregate::Sum),
                agg("average", Aggregate::Avg),
                agg("mean", Aggregate::Avg),
                agg("number of companies", Aggregate::Count),
                agg("how many companies", Aggregate::Count),
                agg("count of companies", Aggregate::Count),
                agg("company count", Aggregate::Count),
                agg("highest", Aggregate::Max),
                agg("maximum", Aggregate::Max),
                agg("largest", Aggregate::Max),
                agg("lowest", Aggregate::Min),
                agg("minimum", Aggregate::Min),
                agg("smallest", Aggregate::Min),
            ],
            scales: alloc::vec![
                scale("monthly", TrendScale::Month),
                scale("by month", TrendScale::Month),
                scale("per month", TrendScale::Month),
                scale("month by month", TrendScale::Month),
                scale("quarterly", TrendScale::Quarter),
                scale("by quarter", TrendScale::Quarter),
                scale("per quarter", TrendScale::Quarter),
                scale("yearly", TrendScale::Year),
                scale("annually", TrendScale::Year),
                scale("by year", TrendScale::Year),
                scale("per year", TrendScale::Year),
                scale("multi-year", TrendScale::MultiYear),
                scale("rolling", TrendScale::MultiYear),
            ],
            membership_verbs: strings(&["joined", "entered", "debuted", "made"]),
            non_entity_words: strings(&[
                "what", "which", "who", "how", "when", "where", "why", "plot", "show", "draw",
                "chart", "graph", "compare", "list", "tell", "give", "display", "can", "could",
                "please", "is", "was", "were", "did", "does", "do", "the", "in", "i", "me",
                "fortune", "global", "visualize", "visualise", "scatter", "create", "make",
                "provide", "and", "for", "of", "a", "an", "companies", "company", "firms", "list",
                "lists", "rank", "ranking", "chart", "bar", "line", "versus", "vs", "against",
            ]),
            topic_stopwords: strings(&[
                "a", "about", "across", "an", "and", "any", "are", "articles", "as", "at", "be",
                "been", "by", "can", "changed", "coverage", "covered", "did", "discussed",
                "do", "does", "evolve", "evolved", "evolving", "for", "fortune", "from", "has",
                "have", "how", "in", "is", "it", "its", "landscape", "last", "me", "news", "of",
                "on", "over", "past", "recent", "recently", "shifted", "show", "tell", "than",
                "that", "the", "their", "theme", "this", "time", "to", "topic", "trend",
                "trends", "view", "views", "was", "were", "what", "when", "which", "with",
                "year", "years", "decade", "month", "months", "quarter", "quarters",
                "monthly", "quarterly", "yearly", "annually", "rolling", "multi", "attention",
                "january", "february", "march", "april", "may", "june", "july", "august",
                "september", "october", "november", "december", "since", "between", "through",
                "until", "ago", "one", "two", "three", "four", "five", "six", "seven", "eight",
                "nine", "ten", "per", "each", "during", "within", "coverage", "been", "our",
                "your", "you", "we", "they", "there", "been",
            ]),
        }
    }
}
