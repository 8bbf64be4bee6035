use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::chart::emit_chart_spec;
use super::table::{Cell, Column, ColumnKind, Provenance, ResultTable};
use super::{BudgetKind, Clock, ExecError, ExecutionResult, SandboxLimits};
use crate::metrics::{Dataset, Metric, Number, Unit};
use crate::query::{canonical_form, Aggregate, GroupKey, Grouping, Intent, QueryPlan};

struct Sandbox<'a> {
    limits: SandboxLimits,
    clock: &'a dyn Clock,
    scanned: u64,
}

impl Sandbox<'_> {
    fn scan(&mut self, rows: usize) -> Result<(), ExecError> {
        self.scanned += rows as u64;
        if self.scanned > self.limits.max_rows_scanned {
            return Err(ExecError::Budget {
                resource: BudgetKind::RowsScanned,
            });
        }
        if self.clock.elapsed_ms() > self.limits.wall_clock_budget_ms {
            return Err(ExecError::Budget {
                resource: BudgetKind::WallClock,
            });
        }
        Ok(())
    }
}

/// Execute a plan over the dataset under `limits`.
///
/// Selection works per effective year: named companies via the entity
/// index, `top_k` by the primary metric within the year's partition, or the
/// whole partition for grouped aggregates. Exceeding a limit aborts with
/// [`ExecError::Budget`]; no partial table is returned.
pub fn execute(
    plan: &QueryPlan,
    ds: &Dataset,
    limits: SandboxLimits,
    clock: &dyn Clock,
) -> Result<ExecutionResult, ExecError> {
    plan.validate().map_err(|e| ExecError::InvalidPlan { reason: e.0 })?;
    if plan.is_rejected() {
        return Err(ExecError::Rejected);
    }
    if !matches!(plan.intent, Intent::MetricQa | Intent::RankingQa | Intent::Chart) {
        return Err(ExecError::InvalidPlan {
            reason: format!("{} plans do not read the dataset", plan.intent.as_str()),
        });
    }
    let mut sandbox = Sandbox {
        limits,
        clock,
        scanned: 0,
    };
    let (columns, rows) = match plan.group {
        Some(g) => grouped(plan, g, ds, &mut sandbox)?,
        None => listed(plan, ds, &mut sandbox)?,
    };
    if rows.is_empty() {
        return Err(ExecError::EmptyResult);
    }
    if rows.len() as u64 > limits.max_output_rows {
        return Err(ExecError::Budget {
            resource: BudgetKind::OutputRows,
        });
    }
    let table = ResultTable {
        columns,
        rows,
        provenance: Provenance {
            plan: canonical_form(plan),
            dataset_fingerprint: ds.fingerprint().into(),
        },
    };
    let chart_spec = match plan.intent {
        Intent::Chart => Some(emit_chart_spec(&table, plan)?),
        _ => None,
    };
    Ok(ExecutionResult {
        table,
        chart_spec,
        rows_scanned: sandbox.scanned,
    })
}

fn column(name: &str, kind: ColumnKind, unit: Option<Unit>) -> Column {
    Column {
        name: name.into(),
        kind,
        unit,
    }
}

fn value_metrics(plan: &QueryPlan) -> impl Iterator<Item = Metric> + '_ {
    plan.metrics.iter().copied().filter(|m| *m != Metric::Rank)
}

fn listed(
    plan: &QueryPlan,
    ds: &Dataset,
    sandbox: &mut Sandbox<'_>,
) -> Result<(Vec<Column>, Vec<Vec<Cell>>), ExecError> {
    let mut columns = alloc::vec![
        column("year", ColumnKind::Temporal, Some(Unit::Year)),
        column("list", ColumnKind::Categorical, None),
        column("rank", ColumnKind::Quantitative, Some(Unit::Rank)),
        column("company", ColumnKind::Categorical, None),
    ];
    columns.extend(value_metrics(plan).map(|m| column(m.field(), ColumnKind::Quantitative, Some(m.unit()))));

    let records = ds.records();
    let mut out = Vec::new();
    for &year in &plan.boundary.effective_years {
        let mut selected: Vec<usize> = Vec::new();
        if !plan.companies.is_empty() {
            for company in &plan.companies {
                match &plan.list_id {
                    Some(list) => {
                        let rows = ds.company_rows(company);
                        sandbox.scan(rows.len())?;
                        selected.extend(
                            rows.iter()
                                .copied()
                                .filter(|&i| records[i].year == year && records[i].list_id == *list),
                        );
                    }
                    None => {
                        sandbox.scan(ds.company_rows(company).len())?;
                        selected.extend(ds.preferred_row(company, year));
                    }
                }
            }
            selected.sort_by(|&a, &b| {
                records[a]
                    .rank
                    .cmp(&records[b].rank)
                    .then_with(|| ds.canonical_name(a).cmp(ds.canonical_name(b)))
            });
        } else {
            let list = plan.list_id.as_deref().unwrap_or_default();
            let k = plan.top_k.unwrap_or(u32::MAX) as usize;
            let metric = plan.primary_metric().unwrap_or(Metric::Rank);
            let part = ds.partition(list, year);
            sandbox.scan(part.len())?;
            let col = ds.column(metric);
            selected = part.filter(|&i| col[i].is_some()).collect();
            selected.sort_by(|&a, &b| top_order(metric, col[a], col[b]).then_with(|| {
                records[a]
                    .rank
                    .cmp(&records[b].rank)
                    .then_with(|| ds.canonical_name(a).cmp(ds.canonical_name(b)))
            }));
            selected.truncate(k);
        }
        for i in selected {
            let r = &records[i];
            let mut row = alloc::vec![
                Cell::Int(year as i64),
                Cell::Text(r.list_id.clone()),
                Cell::Int(r.rank as i64),
                Cell::Text(ds.canonical_name(i).into()),
            ];
            row.extend(value_metrics(plan).map(|m| Cell::from(ds.column(m)[i])));
            out.push(row);
        }
    }
    Ok((columns, out))
}

/// Better value first: descending unless lower is better.
fn top_order(metric: Metric, a: Option<Number>, b: Option<Number>) -> Ordering {
    let (a, b) = (a.map_or(f64::NAN, Number::as_f64), b.map_or(f64::NAN, Number::as_f64));
    if metric.higher_is_better() {
        b.total_cmp(&a)
    } else {
        a.total_cmp(&b)
    }
}

pub(super) fn aggregate_column(metric: Metric, g: Grouping) -> Column {
    match g.aggregate {
        Aggregate::Count => column("company_count", ColumnKind::Quantitative, Some(Unit::Companies)),
        agg => column(
            &format!("{}_{}", agg.as_str(), metric.field()),
            ColumnKind::Quantitative,
            Some(metric.unit()),
        ),
    }
}

#[derive(Default)]
struct Acc {
    n: i64,
    sum: f64,
    isum: i64,
    min: f64,
    max: f64,
}

fn grouped(
    plan: &QueryPlan,
    g: Grouping,
    ds: &Dataset,
    sandbox: &mut Sandbox<'_>,
) -> Result<(Vec<Column>, Vec<Vec<Cell>>), ExecError> {
    let metric = plan.primary_metric().unwrap_or(Metric::Rank);
    let columns = alloc::vec![
        column("year", ColumnKind::Temporal, Some(Unit::Year)),
        column(g.key.as_str(), ColumnKind::Categorical, None),
        aggregate_column(metric, g),
    ];
    let list = plan.list_id.as_deref().unwrap_or_default();
    let records = ds.records();
    let col = ds.column(metric);
    let mut out = Vec::new();
    for &year in &plan.boundary.effective_years {
        let part = ds.partition(list, year);
        sandbox.scan(part.len())?;
        let mut groups: BTreeMap<&str, Acc> = BTreeMap::new();
        // Partitions are in rank order, so sums accumulate by ascending rank.
        for i in part {
            let Some(v) = col[i] else { continue };
            let key = match g.key {
                GroupKey::Sector => records[i].sector.as_str(),
                GroupKey::Country => records[i].country.as_str(),
            };
            let acc = groups.entry(key).or_default();
            let x = v.as_f64();
            if acc.n == 0 {
                acc.min = x;
                acc.max = x;
            }
            acc.n += 1;
            acc.sum += x;
            if let Number::Int(iv) = v {
                acc.isum += iv;
            }
            acc.min = acc.min.min(x);
            acc.max = acc.max.max(x);
        }
        for (key, acc) in groups {
            let value = match g.aggregate {
                Aggregate::Count => Cell::Int(acc.n),
                Aggregate::Avg => Cell::Real(acc.sum / acc.n as f64),
                Aggregate::Sum if metric.is_integer() => Cell::Int(acc.isum),
                Aggregate::Sum => Cell::Real(acc.sum),
                Aggregate::Min if metric.is_integer() => Cell::Int(acc.min as i64),
                Aggregate::Min => Cell::Real(acc.min),
                Aggregate::Max if metric.is_integer() => Cell::Int(acc.max as i64),
                Aggregate::Max => Cell::Real(acc.max),
            };
            out.push(alloc::vec![Cell::Int(year as i64), Cell::Text(String::from(key)), value]);
        }
    }
    Ok((columns, out))
}
