//! Temporal expressions: parsing from query text, resolution against an
//! anchor date, and clamping against dataset coverage.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::metrics::{YearCoverage, MAX_YEAR, MIN_YEAR};
use crate::text::{lex, number_word, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalExpr {
    AbsoluteYear { year: i32 },
    AbsoluteRange { start: i32, end: i32 },
    /// Offset in years from the anchor ("last year" is -1).
    RelativeYearOffset { offset: i32 },
    SinceYear { year: i32 },
    LastNYears { n: u32 },
    /// Several explicitly listed years ("for 2012, 2015, and 2020").
    YearList { years: Vec<i32> },
    /// A calendar month ("in April 2024"); annual data resolves it to its year.
    YearMonth { year: i32, month: u32 },
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalError {
    MalformedRange { start: i32, end: i32 },
}

impl fmt::Display for TemporalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalError::MalformedRange { start, end } => {
                write!(f, "range starts after it ends ({start} > {end})")
            }
        }
    }
}

/// A parsed expression plus the token indices it consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalMatch {
    pub expr: TemporalExpr,
    pub consumed: Vec<usize>,
}

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];
const MONTHS_SHORT: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];

fn month_of(word: &str) -> Option<u32> {
    MONTHS
        .iter()
        .position(|m| *m == word)
        .or_else(|| MONTHS_SHORT.iter().position(|m| *m == word))
        .map(|i| i as u32 + 1)
}

fn year_at(tokens: &[Token], i: usize) -> Option<i32> {
    let t = tokens.get(i)?;
    if t.kind != TokenKind::Number || t.norm.len() != 4 {
        return None;
    }
    let y: i32 = t.norm.parse().ok()?;
    (MIN_YEAR..=MAX_YEAR).contains(&y).then_some(y)
}

fn count_at(tokens: &[Token], i: usize) -> Option<u32> {
    let t = tokens.get(i)?;
    match t.kind {
        TokenKind::Number if t.norm.len() <= 3 => t.norm.parse().ok().filter(|n| *n >= 1),
        TokenKind::Word => number_word(&t.norm),
        _ => None,
    }
}

fn is_at(tokens: &[Token], i: usize, words: &[&str]) -> bool {
    tokens.get(i).is_some_and(|t| words.contains(&t.norm.as_str()))
}

/// Parse the temporal part of a query.
pub fn parse_temporal(text: &str) -> Result<TemporalExpr, TemporalError> {
    parse_tokens(&lex(text)).map(|m| m.expr)
}

/// Parse over already-lexed tokens; constructs are tried in the order
/// range, since, month, relative, listed years.
pub fn parse_tokens(tokens: &[Token]) -> Result<TemporalMatch, TemporalError> {
    let found = |expr, consumed: Vec<usize>| Ok(TemporalMatch { expr, consumed });
    let range = |start: i32, end: i32, consumed: Vec<usize>| {
        if start > end {
            Err(TemporalError::MalformedRange { start, end })
        } else {
            found(TemporalExpr::AbsoluteRange { start, end }, consumed)
        }
    };

    // Ranges: "from A to B", "between A and B", "A-B", "A to B", "A through B".
    for i in 0..tokens.len() {
        let Some(a) = year_at(tokens, i) else { continue };
        if is_at(tokens, i + 1, &["to", "through", "until", "-", "and", "–"]) {
            if let Some(b) = year_at(tokens, i + 2) {
                let joined_by_and = tokens[i + 1].is("and");
                let opener = i > 0 && is_at(tokens, i - 1, &["from", "between"]);
                if joined_by_and && !(i > 0 && tokens[i - 1].is("between")) {
                    continue;
                }
                let mut consumed = alloc::vec![i, i + 1, i + 2];
                if opener {
                    consumed.insert(0, i - 1);
                }
                return range(a, b, consumed);
            }
        }
    }

    // "since 2014", "from 2014 onwards", "starting in 2014", "after 2014".
    for i in 0..tokens.len() {
        let Some(y) = year_at(tokens, i) else { continue };
        if i > 0 && is_at(tokens, i - 1, &["since", "after"]) {
            return found(TemporalExpr::SinceYear { year: y }, alloc::vec![i - 1, i]);
        }
        if i > 1 && is_at(tokens, i - 1, &["in"]) && is_at(tokens, i - 2, &["starting", "beginning"]) {
            return found(TemporalExpr::SinceYear { year: y }, alloc::vec![i - 2, i - 1, i]);
        }
        if i > 0 && tokens[i - 1].is("from") && is_at(tokens, i + 1, &["onwards", "onward", "on"]) {
            return found(TemporalExpr::SinceYear { year: y }, alloc::vec![i - 1, i, i + 1]);
        }
    }

    // "April 2024".
    for i in 1..tokens.len() {
        if let (Some(month), Some(year)) = (month_of(&tokens[i - 1].norm), year_at(tokens, i)) {
            // "may" is also a verb; require a capital letter or a preceding "in".
            if tokens[i - 1].is("may") && !(i > 1 && tokens[i - 2].is("in")) {
                continue;
            }
            return found(TemporalExpr::YearMonth { year, month }, alloc::vec![i - 1, i]);
        }
    }

    // Relative forms.
    for i in 0..tokens.len() {
        let t = &tokens[i];
        if is_at(tokens, i, &["last", "past", "previous", "recent"]) {
            if is_at(tokens, i + 1, &["decade"]) {
                return found(TemporalExpr::LastNYears { n: 10 }, alloc::vec![i, i + 1]);
            }
            if is_at(tokens, i + 1, &["year"]) {
                return found(TemporalExpr::RelativeYearOffset { offset: -1 }, alloc::vec![i, i + 1]);
            }
            if let Some(n) = count_at(tokens, i + 1) {
                if is_at(tokens, i + 2, &["years", "year"]) {
                    return found(TemporalExpr::LastNYears { n }, alloc::vec![i, i + 1, i + 2]);
                }
                if is_at(tokens, i + 2, &["decades"]) {
                    return found(TemporalExpr::LastNYears { n: n * 10 }, alloc::vec![i, i + 1, i + 2]);
                }
            }
        }
        if t.is("this") && is_at(tokens, i + 1, &["year"]) {
            return found(TemporalExpr::RelativeYearOffset { offset: 0 }, alloc::vec![i, i + 1]);
        }
        if is_at(tokens, i, &["years", "year"]) && is_at(tokens, i + 1, &["ago"]) && i > 0 {
            let n = if is_at(tokens, i - 1, &["a", "one"]) {
                Some(1)
            } else {
                count_at(tokens, i - 1)
            };
            if let Some(n) = n {
                return found(
                    TemporalExpr::RelativeYearOffset { offset: -(n as i32) },
                    alloc::vec![i - 1, i, i + 1],
                );
            }
        }
    }

    let years: Vec<(usize, i32)> = (0..tokens.len())
        .filter_map(|i| year_at(tokens, i).map(|y| (i, y)))
        .collect();
    let distinct: BTreeSet<i32> = years.iter().map(|(_, y)| *y).collect();
    let consumed = years.iter().map(|(i, _)| *i).collect();
    match distinct.len() {
        0 => found(TemporalExpr::Unspecified, Vec::new()),
        1 => found(
            TemporalExpr::AbsoluteYear {
                year: *distinct.first().unwrap(),
            },
            consumed,
        ),
        _ => found(
            TemporalExpr::YearList {
                years: distinct.into_iter().collect(),
            },
            consumed,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSource {
    Query,
    Document,
}

/// The date relative expressions are resolved against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub date: NaiveDate,
    pub source: AnchorSource,
}

impl Anchor {
    pub fn query(date: NaiveDate) -> Anchor {
        Anchor {
            date,
            source: AnchorSource::Query,
        }
    }

    pub fn document(date: NaiveDate) -> Anchor {
        Anchor {
            date,
            source: AnchorSource::Document,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Explicit,
    DefaultedToLatest,
    DocumentAnchored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedTime {
    /// Non-empty, sorted ascending, no duplicates.
    pub years: Vec<i32>,
    pub basis: Basis,
}

impl ResolvedTime {
    pub fn explicit(years: Vec<i32>) -> ResolvedTime {
        ResolvedTime {
            years,
            basis: Basis::Explicit,
        }
    }
}

/// Resolve to concrete years. Only the anchor's own date is consulted, so a
/// document-anchored result never depends on the current date.
pub fn resolve(expr: &TemporalExpr, anchor: Anchor, latest_year: i32) -> ResolvedTime {
    let explicit = |years: Vec<i32>| ResolvedTime::explicit(years);
    match expr {
        TemporalExpr::AbsoluteYear { year } | TemporalExpr::YearMonth { year, .. } => {
            explicit(alloc::vec![*year])
        }
        TemporalExpr::AbsoluteRange { start, end } => explicit((*start..=*end).collect()),
        TemporalExpr::YearList { years } => {
            let set: BTreeSet<i32> = years.iter().copied().collect();
            explicit(set.into_iter().collect())
        }
        TemporalExpr::RelativeYearOffset { offset } => ResolvedTime {
            years: alloc::vec![anchor.date.year() + offset],
            basis: match anchor.source {
                AnchorSource::Document => Basis::DocumentAnchored,
                AnchorSource::Query => Basis::Explicit,
            },
        },
        TemporalExpr::SinceYear { year } => explicit((*year..=latest_year.max(*year)).collect()),
        TemporalExpr::LastNYears { n } => {
            let n = (*n).max(1) as i32;
            explicit((latest_year - n + 1..=latest_year).collect())
        }
        TemporalExpr::Unspecified => ResolvedTime {
            years: alloc::vec![latest_year],
            basis: Basis::DefaultedToLatest,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    Metric,
    Ranking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    InRange,
    Redirect,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryOutcome {
    pub kind: BoundaryKind,
    /// Years to actually use; empty iff the request is rejected.
    pub effective_years: Vec<i32>,
    pub nearest_available: Option<i32>,
    pub latest_available: i32,
}

/// Covered year closest to `year`; ties go to the more recent year.
pub fn nearest_year(coverage: &YearCoverage, year: i32) -> i32 {
    let mut best = coverage.cutoff_year;
    for &y in &coverage.years {
        let (d, db) = ((y - year).abs(), (best - year).abs());
        if d < db || (d == db && y > best) {
            best = y;
        }
    }
    best
}

/// Check resolved years against what the data covers.
///
/// * every year covered: `in_range`;
/// * one uncovered year: `redirect` to the nearest year for rankings,
///   `reject` for metrics;
/// * several years: keep the covered ones, rejecting only when none are.
pub fn clamp_to_coverage(
    resolved: &ResolvedTime,
    coverage: &YearCoverage,
    policy: BoundaryPolicy,
) -> BoundaryOutcome {
    let latest = coverage.cutoff_year;
    let reject = BoundaryOutcome {
        kind: BoundaryKind::Reject,
        effective_years: Vec::new(),
        nearest_available: None,
        latest_available: latest,
    };
    let covered: Vec<i32> = resolved
        .years
        .iter()
        .copied()
        .filter(|y| coverage.contains(*y))
        .collect();
    if covered.len() == resolved.years.len() && !covered.is_empty() {
        return BoundaryOutcome {
            kind: BoundaryKind::InRange,
            effective_years: covered,
            nearest_available: None,
            latest_available: latest,
        };
    }
    if resolved.years.len() == 1 {
        return match policy {
            BoundaryPolicy::Ranking => {
                let nearest = nearest_year(coverage, resolved.years[0]);
                BoundaryOutcome {
                    kind: BoundaryKind::Redirect,
                    effective_years: alloc::vec![nearest],
                    nearest_available: Some(nearest),
                    latest_available: latest,
                }
            }
            BoundaryPolicy::Metric => reject,
        };
    }
    if covered.is_empty() {
        return reject;
    }
    BoundaryOutcome {
        kind: BoundaryKind::InRange,
        effective_years: covered,
        nearest_available: None,
        latest_available: latest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn parses_documented_forms() {
        assert_eq!(parse_temporal("since 2014"), Ok(TemporalExpr::SinceYear { year: 2014 }));
        assert_eq!(
            parse_temporal("last year"),
            Ok(TemporalExpr::RelativeYearOffset { offset: -1 })
        );
        assert_eq!(
            parse_temporal("from 2024 to 2020"),
            Err(TemporalError::MalformedRange { start: 2024, end: 2020 })
        );
        assert_eq!(
            parse_temporal("over the past 3 years"),
            Ok(TemporalExpr::LastNYears { n: 3 })
        );
        assert_eq!(parse_temporal("the last decade"), Ok(TemporalExpr::LastNYears { n: 10 }));
        assert_eq!(
            parse_temporal("two years ago"),
            Ok(TemporalExpr::RelativeYearOffset { offset: -2 })
        );
        assert_eq!(parse_temporal("in 2019"), Ok(TemporalExpr::AbsoluteYear { year: 2019 }));
        assert_eq!(
            parse_temporal("for 2012, 2015, and 2020"),
            Ok(TemporalExpr::YearList { years: vec![2012, 2015, 2020] })
        );
        assert_eq!(
            parse_temporal("in April 2024"),
            Ok(TemporalExpr::YearMonth { year: 2024, month: 4 })
        );
        assert_eq!(parse_temporal("top 10 on the Fortune 1000"), Ok(TemporalExpr::Unspecified));
    }

    #[test]
    fn document_anchor_resolves_last_year() {
        let r = resolve(
            &TemporalExpr::RelativeYearOffset { offset: -1 },
            Anchor::document(date(2020, 3, 1)),
            2024,
        );
        assert_eq!(r.years, vec![2019]);
        assert_eq!(r.basis, Basis::DocumentAnchored);
    }

    #[test]
    fn unspecified_defaults_to_latest() {
        let r = resolve(&TemporalExpr::Unspecified, Anchor::query(date(2025, 1, 1)), 2024);
        assert_eq!(r, ResolvedTime { years: vec![2024], basis: Basis::DefaultedToLatest });
        let r = resolve(&TemporalExpr::SinceYear { year: 2014 }, Anchor::query(date(2025, 1, 1)), 2024);
        assert_eq!(r.years, (2014..=2024).collect::<Vec<_>>());
    }

    #[test]
    fn clamp_examples() {
        let cov = YearCoverage::new((2015..=2024).collect()).unwrap();
        let out = clamp_to_coverage(&ResolvedTime::explicit(vec![2025]), &cov, BoundaryPolicy::Metric);
        assert_eq!(out.kind, BoundaryKind::Reject);
        assert_eq!(out.latest_available, 2024);
        assert!(out.effective_years.is_empty());

        let gappy = YearCoverage::new(vec![2015, 2020]).unwrap();
        let out = clamp_to_coverage(&ResolvedTime::explicit(vec![2018]), &gappy, BoundaryPolicy::Ranking);
        assert_eq!(out.kind, BoundaryKind::Redirect);
        assert_eq!(out.nearest_available, Some(2020));

        let out = clamp_to_coverage(
            &ResolvedTime::explicit((2014..=2024).collect()),
            &cov,
            BoundaryPolicy::Metric,
        );
        assert_eq!(out.kind, BoundaryKind::InRange);
        assert_eq!(out.effective_years, (2015..=2024).collect::<Vec<_>>());
    }

    #[test]
    fn equidistant_redirect_prefers_recent() {
        let cov = YearCoverage::new(vec![2016, 2018]).unwrap();
        assert_eq!(nearest_year(&cov, 2017), 2018);
    }

    proptest! {
        #[test]
        fn redirect_matches_linear_scan(
            years in proptest::collection::btree_set(1990i32..2030, 1..12),
            asked in 1980i32..2040,
        ) {
            let cov = YearCoverage::new(years.iter().copied().collect()).unwrap();
            let out = clamp_to_coverage(&ResolvedTime::explicit(vec![asked]), &cov, BoundaryPolicy::Ranking);
            // Oracle: minimize distance, then maximize year.
            let oracle = years.iter().copied().min_by_key(|y| ((y - asked).abs(), -y)).unwrap();
            prop_assert_eq!(out.effective_years, vec![oracle]);
        }

        #[test]
        fn clamp_stays_inside_coverage(
            years in proptest::collection::btree_set(1990i32..2030, 1..12),
            asked in proptest::collection::btree_set(1980i32..2040, 1..8),
            ranking in any::<bool>(),
        ) {
            let cov = YearCoverage::new(years.iter().copied().collect()).unwrap();
            let policy = if ranking { BoundaryPolicy::Ranking } else { BoundaryPolicy::Metric };
            let out = clamp_to_coverage(&ResolvedTime::explicit(asked.into_iter().collect()), &cov, policy);
            prop_assert!(out.effective_years.iter().all(|y| years.contains(y)));
            prop_assert_eq!(out.effective_years.is_empty(), out.kind == BoundaryKind::Reject);
        }

        #[test]
        fn document_anchor_ignores_today(doc_year in 1950i32..2090, latest in 1950i32..2090, off in -20i32..0) {
            let expr = TemporalExpr::RelativeYearOffset { offset: off };
            let a = resolve(&expr, Anchor::document(date(doc_year, 6, 1)), latest);
            let b = resolve(&expr, Anchor::document(date(doc_year, 6, 1)), latest);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.years, vec![doc_year + off]);
        }
    }
}
