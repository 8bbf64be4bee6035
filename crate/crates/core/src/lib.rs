//! Deterministic business-analytics query engine.
//!
//! The crate is `no_std` (with `alloc`) and contains the whole answering
//! pipeline as pure functions over immutable snapshots:
//!
//! * [`metrics`]: validated ranking-list dataset, catalog and lookups.
//! * [`temporal`]: temporal expression parsing, resolution and coverage clamping.
//! * [`query`]: intent classification and the query grammar producing a [`query::QueryPlan`].
//! * [`exec`]: sandboxed plan execution, the naive oracle and canonical chart specs.
//! * [`respond`]: answer and rejection rendering.
//! * [`reference`]: inverted index, BM25 retrieval and re-ranking for citations.
//! * [`trends`]: topic time series over the article corpus.
//! * [`guardrails`]: PII detection, harmful-content lexicons and the input/output gates.
//! * [`engine`]: the pipeline wiring all of the above.
//!
//! File formats, the HTTP service and the evaluation harness live in the `falm` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod engine;
pub mod exec;
pub mod guardrails;
pub mod metrics;
pub mod query;
pub mod reference;
pub mod respond;
pub mod temporal;
pub mod text;
pub mod trends;

mod hash;

pub use chrono::NaiveDate;
pub use hash::sha256_hex;
