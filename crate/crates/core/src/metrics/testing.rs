use alloc::string::String;

use super::record::CompanyRecord;

/// Minimal valid record for unit tests.
pub(crate) fn rec(list: &str, year: i32, rank: u32, company: &str) -> CompanyRecord {
    CompanyRecord {
        list_id: list.into(),
        year,
        rank,
        company: company.into(),
        founded: None,
        sector: String::from("Retailing"),
        industry: String::from("General Merchandisers"),
        country: String::from("USA"),
        region: String::from("North America"),
        revenue: Some(1000.0 / rank as f64),
        revenue_change_pct: None,
        profits: None,
        assets: None,
        market_value: None,
        employees: None,
        eps: None,
    }
}

const SAMPLE: [(&str, &str, &str); 8] = [
    ("Walmart", "Retailing", "USA"),
    ("Amazon", "Retailing", "USA"),
    ("Apple", "Technology", "USA"),
    ("Google", "Technology", "USA"),
    ("Nvidia", "Technology", "USA"),
    ("Toyota Motor", "Motor Vehicles", "Japan"),
    ("Shell", "Energy", "Netherlands"),
    ("Samsung Electronics", "Technology", "South Korea"),
];

/// Eight companies on g500 for 2015..=2024 and the five US ones on f1000
/// for a sparser set of years. Ranks rotate by year.
pub(crate) fn sample_dataset() -> super::Dataset {
    let mut out = alloc::vec::Vec::new();
    for year in 2015..=2024 {
        for (i, (name, sector, country)) in SAMPLE.iter().enumerate() {
            let rank = ((i as i32 + year) % SAMPLE.len() as i32) as u32 + 1;
            let mut r = rec("g500", year, rank, name);
            r.sector = (*sector).into();
            r.country = (*country).into();
            r.revenue = Some(600_000.0 - rank as f64 * 10_000.0 + (year - 2015) as f64);
            r.profits = Some(10_000.0 + (i as f64) * 1_000.5);
            r.employees = Some(100_000 + i as u64 * 1_000);
            out.push(r.clone());
            if *country == "USA" && [2016, 2018, 2020, 2022, 2023, 2024].contains(&year) {
                let us_rank = SAMPLE[..=i].iter().filter(|s| s.2 == "USA").count() as u32;
                r.list_id = "f1000".into();
                r.rank = us_rank;
                out.push(r);
            }
        }
    }
    super::Dataset::from_records(out).unwrap()
}
