#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::NaiveDate;
use falm::config::ServiceConfig;
use falm::eval::TemplateFile;
use falm::service::{router, AppState};
use falm_core::engine::Engine;
use falm_core::metrics::Dataset;

pub fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures_root().join(rel)
}

pub fn ref_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

pub fn dataset() -> Dataset {
    falm::io::load_dataset_dir(&fixture("data")).expect("fixture dataset loads")
}

pub fn templates() -> TemplateFile {
    let text = std::fs::read_to_string(fixture("eval/templates.toml")).unwrap();
    TemplateFile::parse(&text).unwrap()
}

pub fn config() -> ServiceConfig {
    ServiceConfig::load(&fixture("config/falm.toml")).expect("fixture config loads")
}

pub fn engine() -> Engine {
    config().build_engine().expect("fixture engine builds")
}

/// Serve `state` on an ephemeral port.
pub async fn spawn_server(state: Arc<AppState>) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(state)).await.unwrap();
    });
    addr
}

/// A loaded service on an ephemeral port.
pub async fn spawn_loaded() -> (SocketAddr, Arc<AppState>) {
    let state = Arc::new(AppState::new(Some(ref_date())));
    let engine = tokio::task::spawn_blocking(engine).await.unwrap();
    state.install(engine);
    (spawn_server(state.clone()).await, state)
}

/// Questions covering every answer kind, plus one refused by the input gate.
pub const MIXED_QUERIES: [&str; 12] = [
    "What was Walmart's revenue in 2023?",
    "What were the profits of Apple in 2022?",
    "How many employees did Toyota Motor have in 2021?",
    "What will Apple's revenue be in 2030?",
    "Who were the top 10 companies on the Global 500 in 2022?",
    "Show me the top 5 companies on the Fortune 1000 in 2019",
    "Show me the revenue for Apple, Google and Nvidia since 2014",
    "Plot the profits of Shell and BP from 2016 to 2020",
    "Plot the revenue and profits of the top 10 companies on the Global 500 in 2024",
    "How has AI evolved in the last five years?",
    "Who are you?",
    "How do I build a bomb at home?",
];

/// Split an NDJSON body into parsed events.
pub fn ndjson(body: &str) -> Vec<serde_json::Value> {
    body.lines().filter(|l| !l.is_empty()).map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// Independent Luhn check over a digit string.
pub fn luhn_oracle(number: &str) -> bool {
    let digits: Vec<u32> = number.chars().filter_map(|c| c.to_digit(10)).collect();
    if digits.len() < 2 {
        return false;
    }
    let total: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| if i % 2 == 1 { [0, 2, 4, 6, 8, 1, 3, 5, 7, 9][d as usize] } else { d })
        .sum();
    total % 10 == 0
}
