//! Reference semantics for plan execution: a naive scan over every record
//! for every year, sharing no selection or ordering code with the executor.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::table::{Cell, Column, ColumnKind, Provenance, ResultTable};
use super::ExecError;
use crate::metrics::{CompanyRecord, Dataset, Metric, Number, Unit};
use crate::query::{canonical_form, Aggregate, GroupKey, Intent, QueryPlan};

fn canonical<'a>(ds: &'a Dataset, r: &'a CompanyRecord) -> &'a str {
    ds.catalog().canonical_of(&r.company).unwrap_or(&r.company)
}

fn list_preference(list: &str) -> (usize, String) {
    match list {
        "g500" => (0, String::new()),
        "f1000" => (1, String::new()),
        other => (2, other.to_string()),
    }
}

fn value_f64(r: &CompanyRecord, m: Metric) -> Option<f64> {
    match r.metric(m)? {
        Number::Int(i) => Some(i as f64),
        Number::Real(x) => Some(x),
    }
}

fn cell(v: Option<Number>) -> Cell {
    match v {
        None => Cell::Missing,
        Some(Number::Int(i)) => Cell::Int(i),
        Some(Number::Real(x)) => Cell::Real(x),
    }
}

/// Semantically identical to [`super::execute`], without limits.
pub fn oracle_execute(plan: &QueryPlan, ds: &Dataset) -> Result<ResultTable, ExecError> {
    plan.validate().map_err(|e| ExecError::InvalidPlan { reason: e.0 })?;
    if plan.is_rejected() {
        return Err(ExecError::Rejected);
    }
    if plan.intent == Intent::Trend || plan.intent == Intent::Persona {
        return Err(ExecError::InvalidPlan {
            reason: format!("{} plans do not read the dataset", plan.intent.as_str()),
        });
    }
    let (columns, rows) = if let Some(g) = plan.group {
        let metric = plan.metrics[0];
        let value_name = if g.aggregate == Aggregate::Count {
            String::from("company_count")
        } else {
            format!("{}_{}", g.aggregate.as_str(), metric.field())
        };
        let value_unit = if g.aggregate == Aggregate::Count { Unit::Companies } else { metric.unit() };
        let key_name = match g.key {
            GroupKey::Sector => "sector",
            GroupKey::Country => "country",
        };
        let columns = alloc::vec![
            Column { name: "year".into(), kind: ColumnKind::Temporal, unit: Some(Unit::Year) },
            Column { name: key_name.into(), kind: ColumnKind::Categorical, unit: None },
            Column { name: value_name, kind: ColumnKind::Quantitative, unit: Some(value_unit) },
        ];
        let mut rows = Vec::new();
        for &year in &plan.boundary.effective_years {
            let mut keys: Vec<String> = Vec::new();
            for r in ds.records() {
                let k = if g.key == GroupKey::Sector { &r.sector } else { &r.country };
                if Some(&r.list_id) == plan.list_id.as_ref() && r.year == year && !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
            keys.sort();
            for key in keys {
                let mut members: Vec<&CompanyRecord> = ds
                    .records()
                    .iter()
                    .filter(|r| Some(&r.list_id) == plan.list_id.as_ref() && r.year == year)
                    .filter(|r| (if g.key == GroupKey::Sector { &r.sector } else { &r.country }) == &key)
                    .filter(|r| r.metric(metric).is_some())
                    .collect();
                if members.is_empty() {
                    continue;
                }
                members.sort_by_key(|r| r.rank);
                let values: Vec<f64> = members.iter().map(|r| value_f64(r, metric).unwrap()).collect();
                let mut total = 0.0;
                for v in &values {
                    total += v;
                }
                let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
                let highest = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let integer = metric.is_integer();
                let value = match g.aggregate {
                    Aggregate::Count => Cell::Int(members.len() as i64),
                    Aggregate::Sum if integer => {
                        Cell::Int(members.iter().map(|r| match r.metric(metric) {
                            Some(Number::Int(i)) => i,
                            _ => 0,
                        }).sum())
                    }
                    Aggregate::Sum => Cell::Real(total),
                    Aggregate::Avg => Cell::Real(total / values.len() as f64),
                    Aggregate::Min if integer => Cell::Int(lowest as i64),
                    Aggregate::Min => Cell::Real(lowest),
                    Aggregate::Max if integer => Cell::Int(highest as i64),
                    Aggregate::Max => Cell::Real(highest),
                };
                rows.push(alloc::vec![Cell::Int(year as i64), Cell::Text(key), value]);
            }
        }
        (columns, rows)
    } else {
        let shown: Vec<Metric> = plan.metrics.iter().copied().filter(|m| *m != Metric::Rank).collect();
        let mut columns = alloc::vec![
            Column { name: "year".into(), kind: ColumnKind::Temporal, unit: Some(Unit::Year) },
            Column { name: "list".into(), kind: ColumnKind::Categorical, unit: None },
            Column { name: "rank".into(), kind: ColumnKind::Quantitative, unit: Some(Unit::Rank) },
            Column { name: "company".into(), kind: ColumnKind::Categorical, unit: None },
        ];
        for m in &shown {
            columns.push(Column { name: m.field().into(), kind: ColumnKind::Quantitative, unit: Some(m.unit()) });
        }
        let mut rows = Vec::new();
        for &year in &plan.boundary.effective_years {
            let mut chosen: Vec<&CompanyRecord> = Vec::new();
            if plan.companies.is_empty() {
                let metric = plan.metrics[0];
                let mut pool: Vec<&CompanyRecord> = ds
                    .records()
                    .iter()
                    .filter(|r| Some(&r.list_id) == plan.list_id.as_ref() && r.year == year)
                    .filter(|r| r.metric(metric).is_some())
                    .collect();
                // Repeated selection of the best remaining record.
                let k = plan.top_k.unwrap_or(u32::MAX) as usize;
                while chosen.len() < k && !pool.is_empty() {
                    let mut best = 0;
                    for i in 1..pool.len() {
                        if beats(ds, metric, pool[i], pool[best]) {
                            best = i;
                        }
                    }
                    chosen.push(pool.remove(best));
                }
            } else {
                for r in ds.records() {
                    if r.year != year || !plan.companies.iter().any(|c| c == canonical(ds, r)) {
                        continue;
                    }
                    match &plan.list_id {
                        Some(l) if *l == r.list_id => chosen.push(r),
                        Some(_) => {}
                        None => {
                            let better_elsewhere = ds.records().iter().any(|o| {
                                o.year == year
                                    && canonical(ds, o) == canonical(ds, r)
                                    && list_preference(&o.list_id) < list_preference(&r.list_id)
                            });
                            if !better_elsewhere {
                                chosen.push(r);
                            }
                        }
                    }
                }
                chosen.sort_by(|a, b| (a.rank, canonical(ds, a)).cmp(&(b.rank, canonical(ds, b))));
            }
            for r in chosen {
                let mut row = alloc::vec![
                    Cell::Int(year as i64),
                    Cell::Text(r.list_id.clone()),
                    Cell::Int(r.rank as i64),
                    Cell::Text(canonical(ds, r).to_string()),
                ];
                for m in &shown {
                    row.push(cell(r.metric(*m)));
                }
                rows.push(row);
            }
        }
        (columns, rows)
    };
    if rows.is_empty() {
        return Err(ExecError::EmptyResult);
    }
    Ok(ResultTable {
        columns,
        rows,
        provenance: Provenance {
            plan: canonical_form(plan),
            dataset_fingerprint: ds.fingerprint().into(),
        },
    })
}

/// Whether `a` should be listed before `b` when ranking by `metric`.
fn beats(ds: &Dataset, metric: Metric, a: &CompanyRecord, b: &CompanyRecord) -> bool {
    let (va, vb) = (value_f64(a, metric).unwrap(), value_f64(b, metric).unwrap());
    if va != vb {
        return if metric == Metric::Rank { va < vb } else { va > vb };
    }
    if a.rank != b.rank {
        return a.rank < b.rank;
    }
    canonical(ds, a) < canonical(ds, b)
}
