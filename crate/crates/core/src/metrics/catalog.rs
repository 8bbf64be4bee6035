use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::record::{CompanyRecord, Metric};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListInfo {
    pub display_name: String,
    /// Sorted ascending, no duplicates.
    pub years: Vec<i32>,
}

impl ListInfo {
    pub fn cutoff_year(&self) -> i32 {
        *self.years.last().expect("a catalogued list has at least one year")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyInfo {
    /// Earlier spellings of the same company.
    pub aliases: BTreeSet<String>,
    /// list_id -> sorted years in which the company appears on that list.
    pub coverage: BTreeMap<String, Vec<i32>>,
}

impl CompanyInfo {
    /// Union of years across every list.
    pub fn years(&self) -> Vec<i32> {
        let all: BTreeSet<i32> = self.coverage.values().flatten().copied().collect();
        all.into_iter().collect()
    }

    pub fn appears(&self, list_id: &str, year: i32) -> bool {
        self.coverage
            .get(list_id)
            .is_some_and(|ys| ys.binary_search(&year).is_ok())
    }
}

/// The machine-checkable knowledge boundary: which lists, years, companies
/// and metrics exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsCatalog {
    pub lists: BTreeMap<String, ListInfo>,
    pub companies: BTreeMap<String, CompanyInfo>,
    pub metrics: Vec<Metric>,
    /// Every spelling seen in the data -> canonical name.
    names: BTreeMap<String, String>,
}

/// Human name for well-known list identifiers.
pub fn list_display_name(list_id: &str) -> String {
    match list_id {
        "g500" => "Global 500".to_string(),
        "f500" => "Fortune 500".to_string(),
        "f1000" => "Fortune 1000".to_string(),
        other => other.to_uppercase(),
    }
}

/// Lists consulted first when a query does not name one.
pub const PREFERRED_LISTS: [&str; 2] = ["g500", "f1000"];

impl MetricsCatalog {
    /// Derive the catalog from records. The result does not depend on record order.
    pub fn derive(records: &[CompanyRecord]) -> MetricsCatalog {
        let mut lists: BTreeMap<String, BTreeSet<i32>> = BTreeMap::new();
        for r in records {
            lists.entry(r.list_id.clone()).or_default().insert(r.year);
        }
        let names = link_entities(records, &lists);

        let mut companies: BTreeMap<String, CompanyInfo> = BTreeMap::new();
        let mut coverage: BTreeMap<&str, BTreeMap<String, BTreeSet<i32>>> = BTreeMap::new();
        for r in records {
            let canonical = names[&r.company].as_str();
            coverage
                .entry(canonical)
                .or_default()
                .entry(r.list_id.clone())
                .or_default()
                .insert(r.year);
        }
        for (canonical, per_list) in coverage {
            companies.insert(
                canonical.to_string(),
                CompanyInfo {
                    aliases: BTreeSet::new(),
                    coverage: per_list
                        .into_iter()
                        .map(|(l, ys)| (l, ys.into_iter().collect()))
                        .collect(),
                },
            );
        }
        for (name, canonical) in &names {
            if name != canonical {
                if let Some(info) = companies.get_mut(canonical) {
                    info.aliases.insert(name.clone());
                }
            }
        }

        MetricsCatalog {
            lists: lists
                .into_iter()
                .map(|(id, ys)| {
                    let info = ListInfo {
                        display_name: list_display_name(&id),
                        years: ys.into_iter().collect(),
                    };
                    (id, info)
                })
                .collect(),
            companies,
            metrics: Metric::ALL.to_vec(),
            names,
        }
    }

    pub fn cutoff_year(&self, list_id: &str) -> Option<i32> {
        self.lists.get(list_id).map(ListInfo::cutoff_year)
    }

    /// Canonical name for any spelling that appears in the data.
    pub fn canonical_of(&self, name: &str) -> Option<&str> {
        self.names.get(name).map(String::as_str)
    }

    /// All (spelling, canonical) pairs.
    pub fn spellings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.names.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn display_name(&self, list_id: &str) -> String {
        self.lists
            .get(list_id)
            .map(|l| l.display_name.clone())
            .unwrap_or_else(|| list_display_name(list_id))
    }

    /// Lists in the order the default-list rule considers them.
    pub fn lists_by_preference(&self) -> Vec<&str> {
        let mut out: Vec<&str> = PREFERRED_LISTS
            .iter()
            .copied()
            .filter(|l| self.lists.contains_key(*l))
            .collect();
        for id in self.lists.keys() {
            if !out.contains(&id.as_str()) {
                out.push(id);
            }
        }
        out
    }

    /// Default list when a query names none: g500 if every company appears
    /// there in every requested year, else f1000 likewise, else the list with
    /// the most years among those containing all the companies, else the list
    /// with the most years overall.
    pub fn default_list(&self, companies: &[String], years: &[i32]) -> Option<String> {
        for id in PREFERRED_LISTS {
            if let Some(list) = self.lists.get(id) {
                let years_ok = years.iter().all(|y| list.years.binary_search(y).is_ok());
                let companies_ok = companies.iter().all(|c| {
                    self.companies
                        .get(c)
                        .is_some_and(|info| years.iter().all(|y| info.appears(id, *y)))
                });
                if years_ok && companies_ok {
                    return Some(id.to_string());
                }
            }
        }
        let widest = |ids: &mut dyn Iterator<Item = &str>| -> Option<String> {
            let prefs = self.lists_by_preference();
            ids.max_by(|a, b| {
                let (la, lb) = (self.lists[*a].years.len(), self.lists[*b].years.len());
                let pa = prefs.iter().position(|p| p == a);
                let pb = prefs.iter().position(|p| p == b);
                la.cmp(&lb).then(pb.cmp(&pa))
            })
            .map(str::to_string)
        };
        let containing = self.lists.keys().map(String::as_str).filter(|id| {
            companies.iter().all(|c| {
                self.companies
                    .get(c)
                    .is_some_and(|info| info.coverage.contains_key(*id))
            })
        });
        widest(&mut containing.into_iter()).or_else(|| widest(&mut self.lists.keys().map(String::as_str)))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct IdentityKey {
    founded: i32,
    sector: String,
    industry: String,
    country: String,
}

struct NameInfo {
    key: Option<IdentityKey>,
    years: BTreeSet<i32>,
    list_years: BTreeMap<String, BTreeSet<i32>>,
}

/// Map every company spelling to its canonical name.
///
/// Two spellings are one company when they share founding year, sector,
/// industry and country, never appear in the same year, and the later name
/// picks up on some list in the list year right after the earlier name's last
/// appearance. The canonical name is the most recent spelling.
fn link_entities(
    records: &[CompanyRecord],
    list_years: &BTreeMap<String, BTreeSet<i32>>,
) -> BTreeMap<String, String> {
    let mut infos: BTreeMap<&str, NameInfo> = BTreeMap::new();
    for r in records {
        let key = r.founded.map(|founded| IdentityKey {
            founded,
            sector: r.sector.clone(),
            industry: r.industry.clone(),
            country: r.country.clone(),
        });
        let info = infos.entry(r.company.as_str()).or_insert_with(|| NameInfo {
            key: key.clone(),
            years: BTreeSet::new(),
            list_years: BTreeMap::new(),
        });
        if info.key != key {
            info.key = None;
        }
        info.years.insert(r.year);
        info.list_years
            .entry(r.list_id.clone())
            .or_default()
            .insert(r.year);
    }
    let mut groups: BTreeMap<IdentityKey, Vec<&str>> = BTreeMap::new();
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    for (name, info) in &infos {
        match &info.key {
            Some(k) => groups.entry(k.clone()).or_default().push(name),
            None => {
                mapping.insert(name.to_string(), name.to_string());
            }
        }
    }

    let consecutive = |list: &str, earlier: i32, later: i32| -> bool {
        list_years.get(list).is_some_and(|ys| {
            ys.range(earlier + 1..).next() == Some(&later)
        })
    };

    for (_, mut names) in groups {
        names.sort_by_key(|n| (*infos[n].years.first().unwrap(), *n));
        let mut chains: Vec<Vec<&str>> = Vec::new();
        for name in names {
            let info = &infos[name];
            let first = *info.years.first().unwrap();
            let target = chains.iter_mut().find(|chain| {
                let last = infos[chain.last().unwrap()].years.last().copied().unwrap();
                if last >= first {
                    return false;
                }
                let prev = &infos[chain.last().unwrap()];
                prev.list_years.iter().any(|(list, ys)| {
                    let prev_last = *ys.last().unwrap();
                    info.list_years
                        .get(list)
                        .and_then(|ys| ys.first())
                        .is_some_and(|next_first| consecutive(list, prev_last, *next_first))
                })
            });
            match target {
                Some(chain) => chain.push(name),
                None => chains.push(alloc::vec![name]),
            }
        }
        for chain in chains {
            let canonical = chain.last().unwrap().to_string();
            for name in chain {
                mapping.insert(name.to_string(), canonical.clone());
            }
        }
    }
    mapping
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::testing::rec;
    use alloc::vec;

    #[test]
    fn renamed_company_becomes_alias() {
        let mut a = rec("g500", 2021, 5, "Facebook");
        let mut b = rec("g500", 2022, 5, "Meta Platforms");
        for r in [&mut a, &mut b] {
            r.founded = Some(2004);
            r.sector = "Technology".into();
            r.industry = "Internet Services".into();
            r.country = "USA".into();
        }
        let cat = MetricsCatalog::derive(&[a, b]);
        assert_eq!(cat.canonical_of("Facebook"), Some("Meta Platforms"));
        let info = &cat.companies["Meta Platforms"];
        assert!(info.aliases.contains("Facebook"));
        assert_eq!(info.coverage["g500"], vec![2021, 2022]);
        assert!(!cat.companies.contains_key("Facebook"));
    }

    #[test]
    fn cooccurring_names_stay_distinct() {
        let mut a = rec("g500", 2021, 1, "Alpha");
        let mut b = rec("g500", 2021, 2, "Beta");
        let mut c = rec("g500", 2022, 2, "Gamma");
        for r in [&mut a, &mut b, &mut c] {
            r.founded = Some(1990);
        }
        let cat = MetricsCatalog::derive(&[a, b, c]);
        // Gamma follows both in adjacent years; it joins the first chain only.
        assert_eq!(cat.canonical_of("Beta"), Some("Beta"));
        assert_eq!(cat.canonical_of("Alpha"), Some("Gamma"));
    }

    #[test]
    fn default_list_rule() {
        let recs = vec![
            rec("g500", 2023, 1, "Acme"),
            rec("f1000", 2023, 1, "Acme"),
            rec("f1000", 2023, 2, "Local"),
            rec("f1000", 2022, 2, "Local"),
        ];
        let cat = MetricsCatalog::derive(&recs);
        assert_eq!(cat.default_list(&["Acme".into()], &[2023]).as_deref(), Some("g500"));
        assert_eq!(cat.default_list(&["Local".into()], &[2023]).as_deref(), Some("f1000"));
        assert_eq!(cat.default_list(&["Acme".into()], &[2031]).as_deref(), Some("f1000"));
        assert_eq!(cat.default_list(&[], &[2023]).as_deref(), Some("g500"));
    }
}
