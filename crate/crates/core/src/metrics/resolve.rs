use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;

use super::catalog::MetricsCatalog;

/// Largest normalized edit distance still accepted as a fuzzy match.
pub const FUZZY_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Alias,
    Fuzzy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Resolution {
    Matched { canonical: String, kind: MatchKind },
    NoMatch { suggestions: Vec<String> },
}

/// Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the candidate's length in chars.
fn normalized(query: &str, candidate: &str) -> f64 {
    let len = candidate.chars().count().max(1);
    edit_distance(query, candidate) as f64 / len as f64
}

/// Ground free text to a canonical company name.
///
/// Exact and alias matches are case-insensitive. A fuzzy match needs a
/// normalized distance of at most [`FUZZY_THRESHOLD`] and a unique best
/// company; otherwise up to three nearest names are suggested.
pub fn resolve_company(catalog: &MetricsCatalog, text: &str) -> Resolution {
    let query = text.trim().to_lowercase();
    let mut best_alias = None;
    for (spelling, canonical) in catalog.spellings() {
        if spelling.to_lowercase() == query {
            if spelling == canonical {
                return Resolution::Matched {
                    canonical: canonical.to_string(),
                    kind: MatchKind::Exact,
                };
            }
            best_alias.get_or_insert(canonical);
        }
    }
    if let Some(canonical) = best_alias {
        return Resolution::Matched {
            canonical: canonical.to_string(),
            kind: MatchKind::Alias,
        };
    }

    // Best distance per canonical company over all of its spellings.
    let mut scored: Vec<(f64, &str)> = Vec::new();
    for (spelling, canonical) in catalog.spellings() {
        let d = normalized(&query, &spelling.to_lowercase());
        match scored.iter_mut().find(|(_, c)| *c == canonical) {
            Some(entry) if d < entry.0 => entry.0 = d,
            Some(_) => {}
            None => scored.push((d, canonical)),
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    if let Some(&(d, canonical)) = scored.first() {
        let unique = scored.get(1).is_none_or(|next| next.0 > d);
        if d <= FUZZY_THRESHOLD && unique {
            return Resolution::Matched {
                canonical: canonical.to_string(),
                kind: MatchKind::Fuzzy,
            };
        }
    }
    Resolution::NoMatch {
        suggestions: scored.iter().take(3).map(|(_, c)| c.to_string()).collect(),
    }
}
