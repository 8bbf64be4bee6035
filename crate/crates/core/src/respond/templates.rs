use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

/// Fixed answer wording. Placeholders are `{name}`; unknown placeholders
/// are left verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseTemplates {
    pub version: u32,
    pub metric_value: String,
    pub metric_missing: String,
    pub ranking: String,
    pub ranking_item: String,
    pub chart_caption: String,
    pub trend: String,
    pub trend_rising: String,
    pub trend_falling: String,
    pub trend_flat: String,
    pub redirect_note: String,
    pub partial_note: String,
    pub reject_boundary: String,
    pub reject_boundary_note: String,
    pub reject_out_of_domain: String,
    pub reject_unknown_entity: String,
    pub reject_suggestions: String,
    pub reject_out_of_grammar: String,
    pub reject_false_premise: String,
    pub reject_safety: String,
    pub reject_blocked: String,
    pub reject_empty: String,
    pub reject_execution: String,
    pub persona_fallback: String,
    pub persona: BTreeMap<String, String>,
}

impl Default for ResponseTemplates {
    fn default() -> Self {
        let s = |t: &str| t.to_string();
        let mut persona = BTreeMap::new();
        persona.insert(
            s("identity"),
            s("I am a business analytics assistant. I answer questions about companies on the ranking lists, draw charts from that data and point to articles that support each answer."),
        );
        persona.insert(
            s("principles"),
            s("I follow a few fixed principles: every figure I state comes from the ranking-list data, I say so when a question falls outside that data instead of guessing, I show the sources behind an answer, and I decline requests that are unsafe or contain personal information."),
        );
        persona.insert(
            s("creator"),
            s("I was built by a business journalism team to make its ranking lists and archive searchable through plain questions."),
        );
        persona.insert(
            s("capabilities"),
            s("I can look up a company's revenue, profits, assets, market value, employees or earnings per share for a given year, list the top companies on a ranking, draw bar, line and scatter charts, and show how coverage of a topic has changed over time."),
        );
        ResponseTemplates {
            version: 1,
            metric_value: s("{company}'s {metric}{list} in {year} {verb} {value}."),
            metric_missing: s("{company} did not report {metric}{list} for {year}."),
            ranking: s("The top {k} companies on the {list}{by} in {year} were {items}."),
            ranking_item: s("{company} ({value})"),
            chart_caption: s("{title}."),
            trend: s("Coverage of {topic} was {direction} from {from} to {to}, peaking in {peak} with {peak_count} matching articles."),
            trend_rising: s("rising"),
            trend_falling: s("falling"),
            trend_flat: s("flat"),
            redirect_note: s("No {requested} list is available; showing the closest available list ({year})."),
            partial_note: s("Data for {missing} is not available; showing {shown}."),
            reject_boundary: s("That figure is not available. For reference, the latest available data: {latest}"),
            reject_boundary_note: s("No data is available for {requested}; the latest available year is {latest_year}."),
            reject_out_of_domain: s("That question is outside what I can answer. I can report {metrics} for companies on the ranking lists."),
            reject_unknown_entity: s("I could not find that company in the ranking lists."),
            reject_suggestions: s(" Did you mean {suggestions}?"),
            reject_out_of_grammar: s("I can answer questions about company metrics, ranking lists, charts and coverage trends."),
            reject_false_premise: s("That premise does not match the ranking-list data."),
            reject_safety: s("I can't help with that request because it was flagged for {categories}."),
            reject_blocked: s("The response was withheld by the content filter."),
            reject_empty: s("No matching data was found for that question."),
            reject_execution: s("The query could not be completed within the allowed limits."),
            persona_fallback: s("I am a business analytics assistant."),
            persona,
        }
    }
}

/// Substitute `{key}` placeholders.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let key = &after[..close];
                match values.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(key);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
