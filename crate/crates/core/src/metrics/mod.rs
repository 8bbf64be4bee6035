//! Ranking-list dataset: validated rows, derived catalog, lookups and
//! company-name grounding.

mod catalog;
pub mod csv_row;
mod dataset;
mod record;
mod resolve;
#[cfg(test)]
pub(crate) mod testing;

pub use catalog::{list_display_name, CompanyInfo, ListInfo, MetricsCatalog, PREFERRED_LISTS};
pub use dataset::{Dataset, DatasetError, NotFound, YearCoverage};
pub use record::{CompanyRecord, Metric, MetricValue, Number, RecordIssue, Unit, MAX_YEAR, MIN_YEAR};
pub use resolve::{edit_distance, resolve_company, MatchKind, Resolution, FUZZY_THRESHOLD};
