//! Query frontend: keyword grammar, intent classification, parsing into a
//! [`QueryPlan`] and its canonical single-line form.

mod canonical;
mod grammar;
mod intent;
mod parse;
mod plan;
mod scope;

pub use canonical::{canonical_form, format_years, parse_canonical, parse_years, CanonicalError};
pub use grammar::{
    AggregatePhrase, ChartTypePhrase, Grammar, GroupPhrase, ListPhrase, MetricPhrase, PersonaPhrase,
    ScalePhrase,
};
pub use intent::classify_intent;
pub use parse::{parse_query, DiagnosticKind, ParseDiagnostics};
pub use plan::{
    Aggregate, ChartType, GroupKey, Grouping, Intent, PlanError, QueryPlan, TopicSpec, MAX_TOP_K,
};
pub use scope::{plan_coverage, plan_policy};

#[cfg(test)]
mod tests;
