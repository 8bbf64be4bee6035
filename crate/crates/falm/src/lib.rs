//! Loading, evaluation harnesses and the HTTP service around `falm-core`.

pub mod clock;
pub mod config;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod service;
