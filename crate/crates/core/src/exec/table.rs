use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::metrics::{Number, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Temporal,
    Quantitative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub unit: Option<Unit>,
}

/// One table cell; missing values stay explicit and serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn number(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Total order: missing < numbers (by value) < text (lexicographic).
    pub fn total_cmp(&self, other: &Cell) -> Ordering {
        fn class(c: &Cell) -> u8 {
            match c {
                Cell::Missing => 0,
                Cell::Int(_) | Cell::Real(_) => 1,
                Cell::Text(_) => 2,
            }
        }
        match (self, other) {
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (a, b) if class(a) == 1 && class(b) == 1 => {
                a.number().unwrap().total_cmp(&b.number().unwrap())
            }
            (a, b) => class(a).cmp(&class(b)),
        }
    }
}

impl From<Option<Number>> for Cell {
    fn from(v: Option<Number>) -> Cell {
        match v {
            Some(Number::Int(i)) => Cell::Int(i),
            Some(Number::Real(r)) => Cell::Real(r),
            None => Cell::Missing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub plan: String,
    pub dataset_fingerprint: String,
}

/// Rows selected by a plan. Every row has exactly one cell per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn is_well_formed(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.columns.len())
            && self.rows.iter().flatten().all(|c| c.number().is_none_or(f64::is_finite))
    }
}
