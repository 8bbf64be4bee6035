//! Topic time series over the article corpus.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::query::TopicSpec;
use crate::reference::{tokenize, CorpusIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendScale {
    Month,
    Quarter,
    Year,
    MultiYear,
}

impl TrendScale {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendScale::Month => "month",
            TrendScale::Quarter => "quarter",
            TrendScale::Year => "year",
            TrendScale::MultiYear => "multi_year",
        }
    }

    pub fn from_str(s: &str) -> Option<TrendScale> {
        [TrendScale::Month, TrendScale::Quarter, TrendScale::Year, TrendScale::MultiYear]
            .into_iter()
            .find(|t| t.as_str() == s)
    }
}

/// Rolling window length for multi-year buckets.
pub const DEFAULT_WINDOW_YEARS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendBucket {
    pub bucket_start: NaiveDate,
    pub count: u64,
    /// Documents published in the bucket within the query range.
    pub total: u64,
    /// `count / total`, or 0 when `total` is 0.
    pub share: f64,
}

/// Buckets are contiguous and non-overlapping, except multi-year windows,
/// which overlap by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub topic_terms: Vec<String>,
    pub scale: TrendScale,
    /// Window length for `multi_year`; 1 otherwise.
    pub window_years: u32,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub buckets: Vec<TrendBucket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rising,
    Falling,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub direction: Direction,
    pub peak_bucket: NaiveDate,
    /// In percent: 300.0 means the last count is four times the first.
    pub pct_change_first_to_last: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrendError {
    EmptyRange,
    NoTerms,
    BadWindow,
    TooFewBuckets,
}

impl fmt::Display for TrendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendError::EmptyRange => "range start is after range end",
            TrendError::NoTerms => "at least one topic term is required",
            TrendError::BadWindow => "window must be at least one year",
            TrendError::TooFewBuckets => "a summary needs at least two buckets",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendOptions {
    pub window_years: u32,
    /// A document matches when it contains at least this many topic terms.
    pub min_match: usize,
}

impl Default for TrendOptions {
    fn default() -> Self {
        TrendOptions {
            window_years: DEFAULT_WINDOW_YEARS,
            min_match: 1,
        }
    }
}

fn ymd(y: i32, m: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, 1).expect("first of month is valid")
}

/// `[start, end)` bounds of every bucket covering the range.
fn bucket_bounds(scale: TrendScale, window: u32, from: NaiveDate, to: NaiveDate) -> Vec<(NaiveDate, NaiveDate)> {
    let mut out = Vec::new();
    let step = |d: NaiveDate, months: u32| {
        let total = d.year() * 12 + d.month0() as i32 + months as i32;
        ymd(total.div_euclid(12), total.rem_euclid(12) as u32 + 1)
    };
    match scale {
        TrendScale::MultiYear => {
            let last = (to.year() - window as i32 + 1).max(from.year());
            for y in from.year()..=last {
                out.push((ymd(y, 1), ymd(y + window as i32, 1)));
            }
        }
        _ => {
            let (mut start, months) = match scale {
                TrendScale::Month => (ymd(from.year(), from.month()), 1),
                TrendScale::Quarter => (ymd(from.year(), from.month0() / 3 * 3 + 1), 3),
                _ => (ymd(from.year(), 1), 12),
            };
            while start <= to {
                let end = step(start, months);
                out.push((start, end));
                start = end;
            }
        }
    }
    out
}

/// Document positions (in index order) containing every token of `term`.
fn term_docs(index: &CorpusIndex, term: &str) -> BTreeSet<u32> {
    let mut acc: Option<BTreeSet<u32>> = None;
    for tok in tokenize(term) {
        let docs: BTreeSet<u32> = index.postings(&tok).iter().map(|p| p.doc).collect();
        acc = Some(match acc {
            None => docs,
            Some(prev) => prev.intersection(&docs).copied().collect(),
        });
    }
    acc.unwrap_or_default()
}

/// [`topic_series_with`] using default options.
pub fn topic_series(
    index: &CorpusIndex,
    topic_terms: &[String],
    scale: TrendScale,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<TrendSeries, TrendError> {
    topic_series_with(index, topic_terms, scale, from, to, TrendOptions::default())
}

/// Count matching documents per bucket. Only documents published within
/// `[from, to]` are counted, in both `count` and `total`. A multi-word
/// term matches when all of its tokens occur in the document.
pub fn topic_series_with(
    index: &CorpusIndex,
    topic_terms: &[String],
    scale: TrendScale,
    from: NaiveDate,
    to: NaiveDate,
    options: TrendOptions,
) -> Result<TrendSeries, TrendError> {
    if from > to {
        return Err(TrendError::EmptyRange);
    }
    let terms: Vec<String> = topic_terms
        .iter()
        .filter(|t| !tokenize(t).is_empty())
        .cloned()
        .collect();
    if terms.is_empty() {
        return Err(TrendError::NoTerms);
    }
    let window = if scale == TrendScale::MultiYear { options.window_years } else { 1 };
    if window == 0 {
        return Err(TrendError::BadWindow);
    }
    let mut hits = alloc::vec![0usize; index.doc_count()];
    for term in &terms {
        for d in term_docs(index, term) {
            hits[d as usize] += 1;
        }
    }
    let min_match = options.min_match.max(1);
    let bounds = bucket_bounds(scale, window, from, to);
    let mut counts = alloc::vec![(0u64, 0u64); bounds.len()];
    for (d, meta) in index.docs.iter().enumerate() {
        let date = meta.published;
        if date < from || date > to {
            continue;
        }
        let matched = hits[d] >= min_match;
        let first = bounds.partition_point(|(_, end)| *end <= date);
        for (i, (start, _)) in bounds.iter().enumerate().skip(first) {
            if *start > date {
                break;
            }
            counts[i].1 += 1;
            counts[i].0 += u64::from(matched);
        }
    }
    let buckets = bounds
        .iter()
        .zip(counts)
        .map(|((start, _), (count, total))| TrendBucket {
            bucket_start: *start,
            count,
            total,
            share: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        })
        .collect();
    Ok(TrendSeries {
        topic_terms: terms,
        scale,
        window_years: window,
        from,
        to,
        buckets,
    })
}

/// The series a trend plan asks for.
pub fn series_for_topic(index: &CorpusIndex, topic: &TopicSpec) -> Result<TrendSeries, TrendError> {
    let options = TrendOptions {
        window_years: topic.window_years,
        ..TrendOptions::default()
    };
    topic_series_with(index, &topic.terms, topic.scale, topic.from, topic.to, options)
}

/// Direction from the least-squares slope of counts against bucket index;
/// flat when the slope is zero or smaller in magnitude than 5% of the mean.
pub fn summarize_trend(series: &TrendSeries) -> Result<TrendSummary, TrendError> {
    let b = &series.buckets;
    if b.len() < 2 {
        return Err(TrendError::TooFewBuckets);
    }
    let n = b.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = b.iter().map(|x| x.count as f64).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, bucket) in b.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (bucket.count as f64 - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let direction = if slope == 0.0 || slope.abs() < 0.05 * mean_y {
        Direction::Flat
    } else if slope > 0.0 {
        Direction::Rising
    } else {
        Direction::Falling
    };
    let mut peak = &b[0];
    for bucket in &b[1..] {
        if bucket.count > peak.count {
            peak = bucket;
        }
    }
    let (first, last) = (b[0].count as f64, b[b.len() - 1].count as f64);
    Ok(TrendSummary {
        direction,
        peak_bucket: peak.bucket_start,
        pct_change_first_to_last: (last - first) / first.max(1.0) * 100.0,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    use proptest::prelude::*;

    use super::*;
    use crate::reference::{index_corpus, ArticleDoc};

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn doc(i: usize, body: &str, published: NaiveDate) -> ArticleDoc {
        ArticleDoc {
            doc_id: format!("d{i:04}"),
            title: String::new(),
            body: body.into(),
            published,
            section: "Tech".into(),
            url: String::new(),
        }
    }

    fn terms(t: &[&str]) -> Vec<String> {
        t.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn three_ai_docs_in_2023() {
        let docs = vec![
            doc(0, "AI spending", date(2023, 1, 10)),
            doc(1, "new AI chips", date(2023, 3, 5)),
            doc(2, "AI regulation", date(2023, 11, 30)),
            doc(3, "oil prices", date(2023, 3, 6)),
        ];
        let idx = index_corpus(&docs).unwrap();
        let (from, to) = (date(2023, 1, 1), date(2023, 12, 31));
        let year = topic_series(&idx, &terms(&["ai"]), TrendScale::Year, from, to).unwrap();
        assert_eq!(year.buckets.len(), 1);
        assert_eq!((year.buckets[0].count, year.buckets[0].total), (3, 4));
        let month = topic_series(&idx, &terms(&["ai"]), TrendScale::Month, from, to).unwrap();
        let counts: Vec<u64> = month.buckets.iter().map(|b| b.count).collect();
        assert_eq!(counts, [1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0]);
        assert_eq!(month.buckets[2].share, 0.5);
        let none = topic_series(&idx, &terms(&["blockchain"]), TrendScale::Month, from, to).unwrap();
        assert!(none.buckets.iter().all(|b| b.count == 0 && b.share == 0.0));
        assert_eq!(topic_series(&idx, &terms(&["ai"]), TrendScale::Year, to, from), Err(TrendError::EmptyRange));
        assert_eq!(topic_series(&idx, &[], TrendScale::Year, from, to), Err(TrendError::NoTerms));
    }

    #[test]
    fn multi_word_terms_and_min_match() {
        let docs = vec![
            doc(0, "artificial intelligence boom", date(2022, 5, 1)),
            doc(1, "intelligence agencies", date(2022, 5, 1)),
            doc(2, "cloud and ai", date(2022, 5, 1)),
        ];
        let idx = index_corpus(&docs).unwrap();
        let (from, to) = (date(2022, 1, 1), date(2022, 12, 31));
        let s = topic_series(&idx, &terms(&["artificial intelligence"]), TrendScale::Year, from, to).unwrap();
        assert_eq!(s.buckets[0].count, 1);
        let opts = TrendOptions { min_match: 2, ..TrendOptions::default() };
        let s = topic_series_with(&idx, &terms(&["ai", "cloud"]), TrendScale::Year, from, to, opts).unwrap();
        assert_eq!(s.buckets[0].count, 1);
    }

    #[test]
    fn multi_year_windows_roll_by_one_year() {
        let docs: Vec<_> = (2019..=2024).enumerate().map(|(i, y)| doc(i, "ai", date(y, 6, 1))).collect();
        let idx = index_corpus(&docs).unwrap();
        let s = topic_series(&idx, &terms(&["ai"]), TrendScale::MultiYear, date(2019, 1, 1), date(2024, 12, 31)).unwrap();
        let starts: Vec<i32> = s.buckets.iter().map(|b| b.bucket_start.year()).collect();
        assert_eq!(starts, [2019, 2020]);
        assert!(s.buckets.iter().all(|b| b.count == 5));
        assert_eq!(s.window_years, 5);
    }

    fn series(counts: &[u64]) -> TrendSeries {
        TrendSeries {
            topic_terms: terms(&["x"]),
            scale: TrendScale::Year,
            window_years: 1,
            from: date(2020, 1, 1),
            to: date(2020 + counts.len() as i32 - 1, 12, 31),
            buckets: counts
                .iter()
                .enumerate()
                .map(|(i, c)| TrendBucket {
                    bucket_start: date(2020 + i as i32, 1, 1),
                    count: *c,
                    total: *c,
                    share: if *c == 0 { 0.0 } else { 1.0 },
                })
                .collect(),
        }
    }

    #[test]
    fn summaries() {
        let s = summarize_trend(&series(&[1, 2, 3, 4])).unwrap();
        assert_eq!(s.direction, Direction::Rising);
        assert_eq!(s.peak_bucket, date(2023, 1, 1));
        assert_eq!(s.pct_change_first_to_last, 300.0);
        assert_eq!(summarize_trend(&series(&[5, 5, 5])).unwrap().direction, Direction::Flat);
        assert_eq!(summarize_trend(&series(&[0, 0])).unwrap().direction, Direction::Flat);
        assert_eq!(summarize_trend(&series(&[4, 1, 4])).unwrap().peak_bucket, date(2020, 1, 1));
        assert_eq!(summarize_trend(&series(&[9, 1])).unwrap().direction, Direction::Falling);
        assert_eq!(summarize_trend(&series(&[0, 3])).unwrap().pct_change_first_to_last, 300.0);
        assert_eq!(summarize_trend(&series(&[3])), Err(TrendError::TooFewBuckets));
    }

    fn docs_strategy() -> impl Strategy<Value = Vec<ArticleDoc>> {
        let body = prop::sample::select(vec!["ai chips", "oil", "ai", "rates and banks", "cloud ai"]);
        prop::collection::vec((body, 0i64..(6 * 366)), 0..80).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (b, off))| doc(i, b, date(2019, 1, 1) + chrono::TimeDelta::days(off)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn conservation(docs in docs_strategy(), first in 2019i32..2025, len in 0i32..3) {
            let idx = index_corpus(&docs).unwrap();
            let last = (first + len).min(2024);
            let (from, to) = (date(first, 1, 1), date(last, 12, 31));
            let t = terms(&["ai"]);
            let year = topic_series(&idx, &t, TrendScale::Year, from, to).unwrap();
            let month = topic_series(&idx, &t, TrendScale::Month, from, to).unwrap();
            let quarter = topic_series(&idx, &t, TrendScale::Quarter, from, to).unwrap();
            prop_assert_eq!(month.buckets.len(), year.buckets.len() * 12);
            prop_assert_eq!(quarter.buckets.len(), year.buckets.len() * 4);
            for (i, y) in year.buckets.iter().enumerate() {
                let m: u64 = month.buckets[i * 12..(i + 1) * 12].iter().map(|b| b.count).sum();
                let q: u64 = quarter.buckets[i * 4..(i + 1) * 4].iter().map(|b| b.count).sum();
                prop_assert_eq!(y.count, m);
                prop_assert_eq!(y.count, q);
                // Independent count straight from the documents.
                let grep = docs.iter()
                    .filter(|d| d.published.year() == y.bucket_start.year())
                    .filter(|d| d.body.split(' ').any(|w| w == "ai"))
                    .count() as u64;
                prop_assert_eq!(y.count, grep);
            }
            for b in year.buckets.iter().chain(&month.buckets).chain(&quarter.buckets) {
                prop_assert!((0.0..=1.0).contains(&b.share));
            }
            for w in month.buckets.windows(2) {
                prop_assert!(w[0].bucket_start < w[1].bucket_start);
            }
        }

        #[test]
        fn adding_a_match_bumps_one_bucket(docs in docs_strategy(), off in 0i64..(6 * 365), scale in prop::sample::select(vec![TrendScale::Month, TrendScale::Quarter, TrendScale::Year])) {
            let (from, to) = (date(2019, 1, 1), date(2024, 12, 31));
            let t = terms(&["ai"]);
            let before = topic_series(&index_corpus(&docs).unwrap(), &t, scale, from, to).unwrap();
            let mut grown = docs.clone();
            let when = from + chrono::TimeDelta::days(off);
            grown.push(doc(9999, "ai", when));
            let after = topic_series(&index_corpus(&grown).unwrap(), &t, scale, from, to).unwrap();
            let mut changed = 0;
            for (a, b) in before.buckets.iter().zip(&after.buckets) {
                if a.count != b.count {
                    prop_assert_eq!(b.count, a.count + 1);
                    prop_assert!(b.bucket_start <= when);
                    changed += 1;
                }
            }
            prop_assert_eq!(changed, 1);
        }

        #[test]
        fn summary_agrees_with_slope_oracle(counts in prop::collection::vec(0u64..50, 2..15)) {
            let s = summarize_trend(&series(&counts)).unwrap();
            let n = counts.len() as f64;
            let (mut sx, mut sy, mut sxy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
            for (i, c) in counts.iter().enumerate() {
                let (x, y) = (i as f64, *c as f64);
                sx += x; sy += y; sxy += x * y; sxx += x * x;
            }
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            prop_assert!((slope - s.slope).abs() < 1e-9);
            let mean = sy / n;
            if slope.abs() > 0.05 * mean + 1e-9 {
                prop_assert_eq!(s.direction, if slope > 0.0 { Direction::Rising } else { Direction::Falling });
            } else if slope.abs() < 0.05 * mean - 1e-9 {
                prop_assert_eq!(s.direction, Direction::Flat);
            }
            let max = *counts.iter().max().unwrap();
            let first_max = counts.iter().position(|c| *c == max).unwrap();
            prop_assert_eq!(s.peak_bucket.year(), 2020 + first_max as i32);
        }
    }
}
