use alloc::format;
use alloc::string::{String, ToString};

use crate::exec::Cell;
use crate::metrics::{Number, Unit};

/// Insert `,` every three digits of a non-negative integer literal.
fn group_thousands(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// `v` with thousands separators and exactly `decimals` decimals.
pub fn format_decimal(v: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, v.abs());
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s.as_str(), None),
    };
    let zero = s.bytes().all(|b| b == b'0' || b == b'.');
    let mut out = String::new();
    if v < 0.0 && !zero {
        out.push('-');
    }
    out.push_str(&group_thousands(int));
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    out
}

/// Render a value in its unit: `$611,289.0 million`, `2,100,000`, `6.0%`,
/// `$5.20`, rank `1`.
pub fn format_value(unit: Unit, v: Number) -> String {
    let x = v.as_f64();
    let money = |decimals: usize, suffix: &str| {
        let body = format_decimal(x.abs(), decimals);
        let sign = if x < 0.0 && body.bytes().any(|b| (b'1'..=b'9').contains(&b)) { "-" } else { "" };
        format!("{sign}${body}{suffix}")
    };
    match unit {
        Unit::MillionsUsd => money(1, " million"),
        Unit::UsdPerShare => money(2, ""),
        Unit::Percent => format!("{}%", format_decimal(x, 1)),
        Unit::Headcount | Unit::Companies => match v {
            Number::Int(i) => format_decimal(i as f64, 0),
            Number::Real(r) => format_decimal(r, 0),
        },
        Unit::Rank | Unit::Year => match v {
            Number::Int(i) => i.to_string(),
            Number::Real(r) => format_decimal(r, 0),
        },
    }
}

/// Render a table cell under an optional column unit.
pub fn format_cell(unit: Option<Unit>, cell: &Cell) -> String {
    match (cell, unit) {
        (Cell::Int(i), Some(u)) => format_value(u, Number::Int(*i)),
        (Cell::Real(r), Some(u)) => format_value(u, Number::Real(*r)),
        (Cell::Int(i), None) => i.to_string(),
        (Cell::Real(r), None) => format_decimal(*r, 1),
        (Cell::Text(s), _) => s.clone(),
        (Cell::Missing, _) => String::from("n/a"),
    }
}
