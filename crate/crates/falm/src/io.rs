//! Ranking-list CSV, corpus JSONL and persisted index files.

use std::fs;
use std::path::{Path, PathBuf};

use falm_core::metrics::csv_row::{header_line, record_from_fields, HEADER};
use falm_core::metrics::{CompanyRecord, Dataset, DatasetError};
use falm_core::reference::{index_corpus, ArticleDoc, CorpusIndex, IndexError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{source_name}: {error}")]
    Dataset { source_name: String, error: DatasetError },
    #[error("{source_name}: line {line}: {message}")]
    Corpus { source_name: String, line: usize, message: String },
    #[error("corpus: {0:?}")]
    Index(IndexError),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{0}: no input files found")]
    Empty(PathBuf),
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    fs::read(path).map_err(|error| LoadError::Io { path: path.into(), error })
}

/// Files in `dir` with the given extension, sorted by name.
pub fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, LoadError> {
    let entries = fs::read_dir(dir).map_err(|error| LoadError::Io { path: dir.into(), error })?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|error| LoadError::Io { path: dir.into(), error })?.path();
        if path.extension().is_some_and(|e| e == ext) && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn dataset_error(source_name: &str, error: DatasetError) -> LoadError {
    LoadError::Dataset { source_name: source_name.into(), error }
}

/// Parse ranking-list CSV rows, paired with their 1-based line numbers.
fn parse_rows(bytes: &[u8], source_name: &str) -> Result<Vec<(usize, CompanyRecord)>, LoadError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        dataset_error(source_name, DatasetError::Row { line: 1, message: format!("not UTF-8: {e}") })
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut header_seen = false;
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            dataset_error(source_name, DatasetError::Row { line, message: e.to_string() })
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if !header_seen {
            let found: Vec<&str> = record.iter().collect();
            if found != HEADER {
                return Err(dataset_error(
                    source_name,
                    DatasetError::HeaderMismatch { expected: header_line(), found: found.join(",") },
                ));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        let parsed = record_from_fields(&fields)
            .map_err(|issue| dataset_error(source_name, DatasetError::Row { line, message: issue.message }))?;
        rows.push((line, parsed));
    }
    if !header_seen {
        return Err(dataset_error(
            source_name,
            DatasetError::HeaderMismatch { expected: header_line(), found: String::new() },
        ));
    }
    Ok(rows)
}

/// Ingest one CSV file. Any error rejects the whole file.
pub fn ingest_csv(bytes: &[u8], source_name: &str) -> Result<Dataset, LoadError> {
    let rows = parse_rows(bytes, source_name)?;
    Dataset::from_rows(rows).map_err(|e| dataset_error(source_name, e))
}

/// Ingest every `*.csv` in `dir` into one dataset.
pub fn load_dataset_dir(dir: &Path) -> Result<Dataset, LoadError> {
    let files = files_with_extension(dir, "csv")?;
    if files.is_empty() {
        return Err(LoadError::Empty(dir.into()));
    }
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for path in &files {
        let name = path.display().to_string();
        rows.extend(parse_rows(&read(path)?, &name)?);
        names.push(name);
    }
    Dataset::from_rows(rows).map_err(|e| dataset_error(&names.join(", "), e))
}

/// One JSON document per line; blank lines are skipped.
pub fn parse_corpus_jsonl(bytes: &[u8], source_name: &str) -> Result<Vec<ArticleDoc>, LoadError> {
    let err = |line: usize, message: String| LoadError::Corpus { source_name: source_name.into(), line, message };
    let text = std::str::from_utf8(bytes).map_err(|e| err(1, format!("not UTF-8: {e}")))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        docs.push(serde_json::from_str(line).map_err(|e| err(i + 1, e.to_string()))?);
    }
    Ok(docs)
}

pub fn write_corpus_jsonl(docs: &[ArticleDoc]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("documents serialize"));
        out.push('\n');
    }
    out
}

/// Read every `*.jsonl` in `dir`.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<ArticleDoc>, LoadError> {
    let files = files_with_extension(dir, "jsonl")?;
    if files.is_empty() {
        return Err(LoadError::Empty(dir.into()));
    }
    let mut docs = Vec::new();
    for path in &files {
        docs.extend(parse_corpus_jsonl(&read(path)?, &path.display().to_string())?);
    }
    Ok(docs)
}

pub fn build_index(docs: &[ArticleDoc]) -> Result<CorpusIndex, LoadError> {
    index_corpus(docs).map_err(LoadError::Index)
}

pub const INDEX_FORMAT: &str = "falm-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    version: u32,
    fingerprint: String,
    index: CorpusIndex,
}

/// Persist an index as a single JSON file.
pub fn save_index(path: &Path, index: &CorpusIndex) -> Result<(), LoadError> {
    let file = IndexFile {
        format: INDEX_FORMAT.into(),
        version: INDEX_VERSION,
        fingerprint: index.fingerprint.clone(),
        index: index.clone(),
    };
    let json = serde_json::to_vec(&file).expect("index serializes");
    fs::write(path, json).map_err(|error| LoadError::Io { path: path.into(), error })
}

/// Load an index written by [`save_index`]. The recorded fingerprint must
/// match the one embedded in the index.
pub fn load_index(path: &Path) -> Result<CorpusIndex, LoadError> {
    let bad = |message: String| LoadError::Format { path: path.into(), message };
    let file: IndexFile = serde_json::from_slice(&read(path)?).map_err(|e| bad(e.to_string()))?;
    if file.format != INDEX_FORMAT || file.version != INDEX_VERSION {
        return Err(bad(format!("unsupported index format {} v{}", file.format, file.version)));
    }
    if file.fingerprint != file.index.fingerprint {
        return Err(bad("fingerprint does not match index contents".into()));
    }
    Ok(file.index)
}
