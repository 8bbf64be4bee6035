use alloc::collections::BTreeSet;
use alloc::string::String;

use super::plan::Intent;
use crate::metrics::{MetricsCatalog, YearCoverage};
use crate::temporal::BoundaryPolicy;

/// Years a plan's question can be answered for.
///
/// Metric questions use the years in which any named company appears
/// (restricted to the named list, if any); rankings and charts use the
/// list's own years.
pub fn plan_coverage(
    catalog: &MetricsCatalog,
    intent: Intent,
    companies: &[String],
    list_id: Option<&str>,
) -> Option<YearCoverage> {
    match intent {
        Intent::MetricQa => {
            let mut years = BTreeSet::new();
            for c in companies {
                let info = catalog.companies.get(c)?;
                for (list, ys) in &info.coverage {
                    if list_id.is_none_or(|l| l == list) {
                        years.extend(ys.iter().copied());
                    }
                }
            }
            YearCoverage::new(years.into_iter().collect())
        }
        _ => {
            let list = catalog.lists.get(list_id?)?;
            YearCoverage::new(list.years.clone())
        }
    }
}

/// Off-coverage single years are redirected for list-level questions and
/// rejected for per-company values.
pub fn plan_policy(intent: Intent, companies: &[String]) -> BoundaryPolicy {
    match intent {
        Intent::RankingQa => BoundaryPolicy::Ranking,
        Intent::Chart if companies.is_empty() => BoundaryPolicy::Ranking,
        _ => BoundaryPolicy::Metric,
    }
}
