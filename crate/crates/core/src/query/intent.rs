use alloc::string::String;
use alloc::vec::Vec;

use super::grammar::Grammar;
use super::plan::Intent;
use crate::text::{lex, phrase_tokens, Token};

/// Phrase table sorted longest first.
pub(crate) struct Table<T> {
    entries: Vec<(Vec<String>, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Hit<T> {
    pub start: usize,
    pub end: usize,
    pub value: T,
}

impl<T: Clone> Table<T> {
    pub fn new<'a, I>(items: I) -> Table<T>
    where
        I: IntoIterator<Item = (&'a str, T)>,
    {
        let mut entries: Vec<(Vec<String>, T)> = items
            .into_iter()
            .map(|(p, v)| (phrase_tokens(p), v))
            .filter(|(p, _)| !p.is_empty())
            .collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
        Table { entries }
    }

    fn match_at(&self, tokens: &[Token], mask: &[bool], i: usize) -> Option<(usize, &T)> {
        self.entries.iter().find_map(|(phrase, v)| {
            let end = i + phrase.len();
            let fits = end <= tokens.len()
                && (i..end).all(|j| !mask[j])
                && phrase.iter().zip(&tokens[i..end]).all(|(p, t)| *p == t.norm);
            fits.then_some((end, v))
        })
    }

    /// Leftmost-longest non-overlapping matches over unmasked tokens; matched
    /// tokens become masked.
    pub fn scan(&self, tokens: &[Token], mask: &mut [bool]) -> Vec<Hit<T>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if let Some((end, v)) = self.match_at(tokens, mask, i) {
                let value = v.clone();
                mask[i..end].iter_mut().for_each(|m| *m = true);
                out.push(Hit { start: i, end, value });
                i = end;
            } else {
                i += 1;
            }
        }
        out
    }

    /// First match without masking anything.
    pub fn find(&self, tokens: &[Token]) -> Option<Hit<T>> {
        let mask = alloc::vec![false; tokens.len()];
        (0..tokens.len()).find_map(|i| {
            self.match_at(tokens, &mask, i).map(|(end, v)| Hit {
                start: i,
                end,
                value: v.clone(),
            })
        })
    }
}

pub(crate) fn words(list: &[String]) -> Table<()> {
    Table::new(list.iter().map(|w| (w.as_str(), ())))
}

/// Metric phrases and unsupported-metric phrases in one table so the longest
/// wording decides ("profit margin" is unsupported, "profit" is not).
pub(crate) fn metric_table(grammar: &Grammar) -> Table<Option<crate::metrics::Metric>> {
    Table::new(
        grammar
            .metrics
            .iter()
            .map(|m| (m.phrase.as_str(), Some(m.metric)))
            .chain(grammar.unsupported_metrics.iter().map(|p| (p.as_str(), None))),
    )
}

pub(crate) fn list_table(grammar: &Grammar) -> Table<String> {
    Table::new(grammar.lists.iter().map(|l| (l.phrase.as_str(), l.list_id.clone())))
}

pub(crate) fn persona_table(grammar: &Grammar) -> Table<String> {
    Table::new(grammar.persona.iter().map(|p| (p.phrase.as_str(), p.key.clone())))
}

/// Intent of an already-lexed query; see [`classify_intent`].
pub(crate) fn classify_tokens(tokens: &[Token], grammar: &Grammar) -> Intent {
    if persona_table(grammar).find(tokens).is_some() {
        return Intent::Persona;
    }
    let mut mask = alloc::vec![false; tokens.len()];
    list_table(grammar).scan(tokens, &mut mask);
    let mentions_metric = !metric_table(grammar).scan(tokens, &mut mask).is_empty();
    if words(&grammar.chart_verbs).find(tokens).is_some()
        || (mentions_metric && words(&grammar.soft_chart_verbs).find(tokens).is_some())
    {
        return Intent::Chart;
    }
    if words(&grammar.ranking_words).find(tokens).is_some() {
        return Intent::RankingQa;
    }
    if !mentions_metric && words(&grammar.trend_words).find(tokens).is_some() {
        return Intent::Trend;
    }
    Intent::MetricQa
}

/// Classify a query by fixed priority: persona, chart, ranking, trend, and
/// metric question as the default. Company names play no part.
pub fn classify_intent(text: &str, grammar: &Grammar) -> Intent {
    classify_tokens(&lex(text), grammar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intent(text: &str) -> Intent {
        classify_intent(text, &Grammar::default())
    }

    #[test]
    fn documented_examples() {
        assert_eq!(
            intent("Are there any philosophical principles embedded in your programming?"),
            Intent::Persona
        );
        assert_eq!(intent("Plot the revenue for Apple, Google and Nvidia in 2024"), Intent::Chart);
        assert_eq!(intent("What was Walmart's revenue in 2024?"), Intent::MetricQa);
        assert_eq!(intent("What were the top 5 companies on the Global 500 in 2020?"), Intent::RankingQa);
        assert_eq!(intent("How has AI evolved in the last five years?"), Intent::Trend);
        assert_eq!(intent("What was Fortune's view on inflation in April 2024?"), Intent::Trend);
    }

    #[test]
    fn soft_verbs_need_a_metric() {
        assert_eq!(intent("Show me the revenue for Apple since 2014"), Intent::Chart);
        assert_eq!(intent("Show me the top 5 companies of 2020"), Intent::RankingQa);
    }

    #[test]
    fn longest_metric_phrase_wins() {
        let g = Grammar::default();
        let toks = lex("what is the profit margin");
        let mut mask = alloc::vec![false; toks.len()];
        let hits = metric_table(&g).scan(&toks, &mut mask);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].value, None);
    }
}
