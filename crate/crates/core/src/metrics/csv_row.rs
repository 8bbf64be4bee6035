//! Typed conversion between ranking-list CSV fields and [`CompanyRecord`].
//!
//! Field splitting and quoting on the read side is left to the caller; this
//! module owns the header, per-field typing and the canonical writer used for
//! fingerprints and round-trips.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt::Write;
use core::str::FromStr;

use super::record::{CompanyRecord, RecordIssue};

pub const HEADER: [&str; 16] = [
    "list_id",
    "year",
    "rank",
    "company",
    "founded",
    "sector",
    "industry",
    "country",
    "region",
    "revenue_musd",
    "revenue_change_pct",
    "profits_musd",
    "assets_musd",
    "market_value_musd",
    "employees",
    "eps",
];

/// The exact header line, without the trailing newline.
pub fn header_line() -> String {
    HEADER.join(",")
}

fn required<T: FromStr>(name: &str, raw: &str) -> Result<T, RecordIssue> {
    if raw.is_empty() {
        return Err(RecordIssue {
            message: format!("{name} is required"),
        });
    }
    raw.parse().map_err(|_| RecordIssue {
        message: format!("{name}: '{raw}' is not a valid integer"),
    })
}

fn optional_int<T: FromStr>(name: &str, raw: &str) -> Result<Option<T>, RecordIssue> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| RecordIssue {
        message: format!("{name}: '{raw}' is not a valid integer"),
    })
}

fn optional_real(name: &str, raw: &str) -> Result<Option<f64>, RecordIssue> {
    if raw.is_empty() {
        return Ok(None);
    }
    // Rust accepts "inf"/"NaN"; only plain decimal numbers are valid cells.
    let plain = raw
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'-' | b'+' | b'.' | b'e' | b'E'));
    match raw.parse::<f64>() {
        Ok(v) if plain && v.is_finite() => Ok(Some(v)),
        _ => Err(RecordIssue {
            message: format!("{name}: '{raw}' is not a finite number"),
        }),
    }
}

/// Build a record from the sixteen fields of one data row.
pub fn record_from_fields<S: AsRef<str>>(fields: &[S]) -> Result<CompanyRecord, RecordIssue> {
    if fields.len() != HEADER.len() {
        return Err(RecordIssue {
            message: format!("expected {} fields, found {}", HEADER.len(), fields.len()),
        });
    }
    let f = |i: usize| fields[i].as_ref();
    let record = CompanyRecord {
        list_id: f(0).to_string(),
        year: required("year", f(1))?,
        rank: required("rank", f(2))?,
        company: f(3).to_string(),
        founded: optional_int("founded", f(4))?,
        sector: f(5).to_string(),
        industry: f(6).to_string(),
        country: f(7).to_string(),
        region: f(8).to_string(),
        revenue: optional_real("revenue_musd", f(9))?,
        revenue_change_pct: optional_real("revenue_change_pct", f(10))?,
        profits: optional_real("profits_musd", f(11))?,
        assets: optional_real("assets_musd", f(12))?,
        market_value: optional_real("market_value_musd", f(13))?,
        employees: optional_int("employees", f(14))?,
        eps: optional_real("eps", f(15))?,
    };
    record.validate()?;
    Ok(record)
}

fn push_text(out: &mut String, value: &str) {
    if value.contains([',', '"', '\n', '\r']) {
        out.push('"');
        out.push_str(&value.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(value);
    }
}

fn push_opt<T: core::fmt::Display>(out: &mut String, value: Option<T>) {
    if let Some(v) = value {
        let _ = write!(out, "{v}");
    }
}

/// Append one record as an RFC-4180 line (LF terminated). Floats use the
/// shortest representation that parses back to the same value.
pub fn write_record(out: &mut String, r: &CompanyRecord) {
    push_text(out, &r.list_id);
    let _ = write!(out, ",{},{},", r.year, r.rank);
    push_text(out, &r.company);
    out.push(',');
    push_opt(out, r.founded);
    for text in [&r.sector, &r.industry, &r.country, &r.region] {
        out.push(',');
        push_text(out, text);
    }
    for value in [r.revenue, r.revenue_change_pct, r.profits, r.assets, r.market_value] {
        out.push(',');
        push_opt(out, value);
    }
    out.push(',');
    push_opt(out, r.employees);
    out.push(',');
    push_opt(out, r.eps);
    out.push('\n');
}
