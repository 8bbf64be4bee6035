use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::Serialize;

use super::catalog::MetricsCatalog;
use super::csv_row::{header_line, write_record};
use super::record::{CompanyRecord, Metric, MetricValue, Number};
use crate::hash::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    HeaderMismatch { expected: String, found: String },
    Row { line: usize, message: String },
    DuplicateKey { key: String },
    UnknownList(String),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::HeaderMismatch { expected, found } => {
                write!(f, "header mismatch: expected '{expected}', found '{found}'")
            }
            DatasetError::Row { line, message } => write!(f, "line {line}: {message}"),
            DatasetError::DuplicateKey { key } => write!(f, "duplicate key {key}"),
            DatasetError::UnknownList(id) => write!(f, "unknown list '{id}'"),
        }
    }
}

/// Years a list covers; `cutoff_year` is the last one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearCoverage {
    pub years: Vec<i32>,
    pub cutoff_year: i32,
}

impl YearCoverage {
    pub fn new(mut years: Vec<i32>) -> Option<YearCoverage> {
        years.sort_unstable();
        years.dedup();
        let cutoff_year = *years.last()?;
        Some(YearCoverage { years, cutoff_year })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.years.binary_search(&year).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFound {
    UnknownCompany,
    YearOutsideCoverage { latest: i32 },
    ValueMissing,
}

impl fmt::Display for NotFound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotFound::UnknownCompany => f.write_str("unknown company"),
            NotFound::YearOutsideCoverage { latest } => {
                write!(f, "year outside coverage (latest {latest})")
            }
            NotFound::ValueMissing => f.write_str("value missing for that row"),
        }
    }
}

/// Immutable, validated ranking-list data.
///
/// Rows are kept sorted by `(list_id, year, rank)`; every `(list_id, year)`
/// pair owns one contiguous partition. Metric values are also held as
/// per-metric columns aligned with the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<CompanyRecord>,
    entity: Vec<u32>,
    entity_names: Vec<String>,
    entity_rows: Vec<Vec<usize>>,
    partitions: BTreeMap<(String, i32), Range<usize>>,
    columns: Vec<Vec<Option<Number>>>,
    catalog: MetricsCatalog,
    fingerprint: String,
}

impl Dataset {
    /// Validate and build from records paired with their source line numbers.
    /// Any invalid or duplicated row rejects the whole input.
    pub fn from_rows<I>(rows: I) -> Result<Dataset, DatasetError>
    where
        I: IntoIterator<Item = (usize, CompanyRecord)>,
    {
        let mut records = Vec::new();
        let mut by_rank: BTreeSet<(String, i32, u32)> = BTreeSet::new();
        let mut by_name: BTreeSet<(String, i32, String)> = BTreeSet::new();
        for (line, record) in rows {
            record.validate().map_err(|issue| DatasetError::Row {
                line,
                message: issue.message,
            })?;
            if !by_rank.insert((record.list_id.clone(), record.year, record.rank)) {
                return Err(DatasetError::DuplicateKey {
                    key: format!("({}, {}, rank {})", record.list_id, record.year, record.rank),
                });
            }
            if !by_name.insert((record.list_id.clone(), record.year, record.company.clone())) {
                return Err(DatasetError::DuplicateKey {
                    key: format!("({}, {}, {})", record.list_id, record.year, record.company),
                });
            }
            records.push(record);
        }
        Ok(Self::build(records))
    }

    /// Like [`Dataset::from_rows`], numbering rows as they would appear after a header line.
    pub fn from_records(records: Vec<CompanyRecord>) -> Result<Dataset, DatasetError> {
        Self::from_rows(records.into_iter().enumerate().map(|(i, r)| (i + 2, r)))
    }

    fn build(mut records: Vec<CompanyRecord>) -> Dataset {
        records.sort_by(|a, b| {
            (a.list_id.as_str(), a.year, a.rank).cmp(&(b.list_id.as_str(), b.year, b.rank))
        });
        let catalog = MetricsCatalog::derive(&records);
        let entity_names: Vec<String> = catalog.companies.keys().cloned().collect();
        let mut entity = Vec::with_capacity(records.len());
        let mut entity_rows = alloc::vec![Vec::new(); entity_names.len()];
        let mut partitions: BTreeMap<(String, i32), Range<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            let canonical = catalog.canonical_of(&r.company).expect("derived from these records");
            let idx = entity_names
                .binary_search_by(|n| n.as_str().cmp(canonical))
                .expect("canonical names are catalogued");
            entity.push(idx as u32);
            entity_rows[idx].push(i);
            partitions
                .entry((r.list_id.clone(), r.year))
                .and_modify(|range| range.end = i + 1)
                .or_insert(i..i + 1);
        }
        let columns = Metric::ALL
            .iter()
            .map(|m| records.iter().map(|r| r.metric(*m)).collect())
            .collect();
        let csv = canonical_csv(&records);
        Dataset {
            fingerprint: sha256_hex(csv.as_bytes()),
            records,
            entity,
            entity_names,
            entity_rows,
            partitions,
            columns,
            catalog,
        }
    }

    pub fn records(&self) -> &[CompanyRecord] {
        &self.records
    }

    pub fn catalog(&self) -> &MetricsCatalog {
        &self.catalog
    }

    /// SHA-256 of the canonical CSV serialization.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Header plus rows in `(list_id, year, rank)` order.
    pub fn to_csv(&self) -> String {
        canonical_csv(&self.records)
    }

    /// Canonical company name of row `row`.
    pub fn canonical_name(&self, row: usize) -> &str {
        &self.entity_names[self.entity[row] as usize]
    }

    /// Row indices of one `(list_id, year)` partition, in rank order.
    pub fn partition(&self, list_id: &str, year: i32) -> Range<usize> {
        self.partitions
            .get(&(String::from(list_id), year))
            .cloned()
            .unwrap_or(0..0)
    }

    /// Row indices of every spelling of a canonical company.
    pub fn company_rows(&self, canonical: &str) -> &[usize] {
        match self
            .entity_names
            .binary_search_by(|n| n.as_str().cmp(canonical))
        {
            Ok(i) => &self.entity_rows[i],
            Err(_) => &[],
        }
    }

    /// Column of `metric` values aligned with [`Dataset::records`].
    pub fn column(&self, metric: Metric) -> &[Option<Number>] {
        let i = Metric::ALL.iter().position(|m| *m == metric).unwrap();
        &self.columns[i]
    }

    pub fn coverage(&self, list_id: &str) -> Result<YearCoverage, DatasetError> {
        self.catalog
            .lists
            .get(list_id)
            .and_then(|l| YearCoverage::new(l.years.clone()))
            .ok_or_else(|| DatasetError::UnknownList(list_id.into()))
    }

    /// Years in which a company appears on any list.
    pub fn company_coverage(&self, canonical: &str) -> Option<YearCoverage> {
        self.catalog
            .companies
            .get(canonical)
            .and_then(|info| YearCoverage::new(info.years()))
    }

    /// Row used to answer a per-company question for `year` when no list is
    /// named: the first list in preference order that contains the company.
    pub fn preferred_row(&self, canonical: &str, year: i32) -> Option<usize> {
        let rows = self.company_rows(canonical);
        self.catalog
            .lists_by_preference()
            .into_iter()
            .find_map(|list| {
                rows.iter()
                    .copied()
                    .find(|&i| self.records[i].year == year && self.records[i].list_id == list)
            })
    }

    /// Stored value of `metric` for a company in `year`.
    pub fn lookup_metric(
        &self,
        canonical: &str,
        metric: Metric,
        year: i32,
    ) -> Result<MetricValue, NotFound> {
        let coverage = self
            .company_coverage(canonical)
            .ok_or(NotFound::UnknownCompany)?;
        if !coverage.contains(year) {
            return Err(NotFound::YearOutsideCoverage {
                latest: coverage.cutoff_year,
            });
        }
        let row = self
            .preferred_row(canonical, year)
            .ok_or(NotFound::YearOutsideCoverage {
                latest: coverage.cutoff_year,
            })?;
        let value = self.column(metric)[row].ok_or(NotFound::ValueMissing)?;
        Ok(MetricValue {
            metric,
            value,
            unit: metric.unit(),
        })
    }
}

fn canonical_csv(sorted: &[CompanyRecord]) -> String {
    let mut out = header_line();
    out.push('\n');
    for r in sorted {
        write_record(&mut out, r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::testing::rec;
    use alloc::vec;

    #[test]
    fn two_rows_give_one_list_year() {
        let ds = Dataset::from_records(vec![rec("g500", 2023, 1, "Acme"), rec("g500", 2023, 2, "Beta")])
            .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.catalog().lists["g500"].years, vec![2023]);
        assert_eq!(ds.partition("g500", 2023), 0..2);
        assert_eq!(ds.partition("g500", 2022), 0..0);
    }

    #[test]
    fn rank_zero_reports_line() {
        let err = Dataset::from_records(vec![rec("g500", 2023, 1, "A"), rec("g500", 2023, 0, "B")])
            .unwrap_err();
        assert_eq!(
            err,
            DatasetError::Row {
                line: 3,
                message: "rank must be >= 1".into()
            }
        );
    }

    #[test]
    fn duplicates_abort() {
        let err = Dataset::from_records(vec![rec("g500", 2023, 1, "A"), rec("g500", 2023, 1, "B")])
            .unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateKey { .. }));
        let err = Dataset::from_records(vec![rec("g500", 2023, 1, "A"), rec("g500", 2023, 2, "A")])
            .unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateKey { .. }));
    }

    #[test]
    fn lookup_distinguishes_not_found() {
        let mut acme = rec("g500", 2023, 1, "Acme");
        acme.revenue = Some(100.0);
        let mut acme24 = rec("g500", 2024, 1, "Acme");
        acme24.revenue = None;
        let ds = Dataset::from_records(vec![acme, acme24]).unwrap();
        let v = ds.lookup_metric("Acme", Metric::Revenue, 2023).unwrap();
        assert_eq!(v.value, Number::Real(100.0));
        assert_eq!(
            ds.lookup_metric("Acme", Metric::Revenue, 2031),
            Err(NotFound::YearOutsideCoverage { latest: 2024 })
        );
        assert_eq!(
            ds.lookup_metric("Acme", Metric::Revenue, 2024),
            Err(NotFound::ValueMissing)
        );
        assert_eq!(
            ds.lookup_metric("Nobody", Metric::Revenue, 2023),
            Err(NotFound::UnknownCompany)
        );
        assert_eq!(
            ds.lookup_metric("Acme", Metric::Rank, 2024).unwrap().value,
            Number::Int(1)
        );
    }

    #[test]
    fn coverage_of_gappy_list() {
        let ds = Dataset::from_records(vec![rec("x", 2021, 1, "A"), rec("x", 2019, 1, "A")]).unwrap();
        let cov = ds.coverage("x").unwrap();
        assert_eq!(cov.years, vec![2019, 2021]);
        assert_eq!(cov.cutoff_year, 2021);
        assert_eq!(ds.coverage("x500"), Err(DatasetError::UnknownList("x500".into())));
    }

    #[test]
    fn fingerprint_ignores_input_order() {
        let a = vec![rec("g500", 2023, 1, "A"), rec("g500", 2023, 2, "B"), rec("f1000", 2022, 1, "A")];
        let mut b = a.clone();
        b.reverse();
        let (da, db) = (Dataset::from_records(a).unwrap(), Dataset::from_records(b).unwrap());
        assert_eq!(da.fingerprint(), db.fingerprint());
        assert_eq!(da.catalog(), db.catalog());
        assert_eq!(da, db);
    }
}
