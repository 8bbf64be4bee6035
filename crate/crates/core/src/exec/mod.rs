//! Plan execution: the sandboxed executor, an independent full-scan oracle,
//! and the chart spec compiled from a result table.

mod chart;
mod oracle;
mod run;
mod table;

pub use chart::{emit_chart_spec, Axis, ChartRow, ChartSpec, ValueAxis, CHART_SPEC_VERSION};
pub use oracle::oracle_execute;
pub use run::execute;
pub use table::{Cell, Column, ColumnKind, Provenance, ResultTable};

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Resource limits for one execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandboxLimits {
    pub max_rows_scanned: u64,
    pub max_output_rows: u64,
    pub wall_clock_budget_ms: u64,
}

impl Default for SandboxLimits {
    fn default() -> Self {
        SandboxLimits {
            max_rows_scanned: 1_000_000,
            max_output_rows: 10_000,
            wall_clock_budget_ms: 2_000,
        }
    }
}

impl SandboxLimits {
    pub fn is_valid(&self) -> bool {
        self.max_rows_scanned > 0 && self.max_output_rows > 0 && self.wall_clock_budget_ms > 0
    }
}

/// Milliseconds elapsed since the execution started. The core has no clock
/// of its own; hosts inject one.
pub trait Clock {
    fn elapsed_ms(&self) -> u64;
}

/// A clock that never advances.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    RowsScanned,
    OutputRows,
    WallClock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ExecError {
    Budget { resource: BudgetKind },
    EmptyResult,
    ColumnAbsent { column: String },
    /// Rejected plans never execute.
    Rejected,
    InvalidPlan { reason: String },
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::Budget { resource } => write!(f, "budget exceeded: {resource:?}"),
            ExecError::EmptyResult => f.write_str("no rows match the plan"),
            ExecError::ColumnAbsent { column } => write!(f, "column '{column}' is absent"),
            ExecError::Rejected => f.write_str("plan is a boundary rejection"),
            ExecError::InvalidPlan { reason } => write!(f, "invalid plan: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionResult {
    pub table: ResultTable,
    pub chart_spec: Option<ChartSpec>,
    /// Rows the executor touched.
    pub rows_scanned: u64,
}

#[cfg(test)]
mod tests;
