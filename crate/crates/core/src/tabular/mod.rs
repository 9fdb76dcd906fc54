//! Canonical tabular data model.
//!
//! A table is a list of named columns over a fixed row count with stable row
//! ids. Categorical, ordinal and binary columns carry an explicit category
//! list; cells hold codes into that list. Missing cells are represented
//! explicitly and never imputed; cells whose raw value falls outside a
//! declared category space are flagged invalid and keep the offending text.

mod csv_io;
mod ops;

pub use csv_io::{load_csv, load_csv_with_sidecar, write_csv, ColumnHint, TableSchema};
pub use ops::{
    bin_target, encode_ordinal, explode_multilabel, split, stratified_downsample, to_transactions,
};

use serde::{Deserialize, Serialize};

/// Errors raised by table construction and table operations.
#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("parse error at data row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("column `{column}`: value `{value}` not in declared order (rows {rows:?})")]
    Encoding {
        column: String,
        value: String,
        rows: Vec<usize>,
    },
    #[error("column `{column}`: unknown label `{label}` at row {row}")]
    UnknownLabel {
        column: String,
        label: String,
        row: usize,
    },
    #[error("split produced an empty partition (n_rows {n_rows}, train_fraction {fraction})")]
    EmptySplit { n_rows: usize, fraction: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Role of a column in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Ordinal,
    Binary,
    Text,
    Numeric,
}

impl ColumnKind {
    /// Kinds that participate in contingency tables and rule mining.
    pub fn is_encoded(self) -> bool {
        matches!(
            self,
            ColumnKind::Categorical | ColumnKind::Ordinal | ColumnKind::Binary
        )
    }
}

/// A single cell. Category codes index into the owning column's category
/// list; `Invalid` keeps the raw text of a value outside the declared space.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Category(u32),
    Text(String),
    Number(f64),
    Invalid(String),
}

/// A named column with a kind, an ordered category list (empty for text and
/// numeric columns) and one cell per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub categories: Vec<String>,
    pub cells: Vec<Cell>,
}

impl Column {
    /// Build an encoded column from raw strings against an explicit category
    /// list. Values outside the list become `Cell::Invalid`; empty strings
    /// become `Cell::Missing`.
    pub fn from_raw(
        name: impl Into<String>,
        kind: ColumnKind,
        categories: Vec<String>,
        raw: &[Option<&str>],
    ) -> Result<Self, TableError> {
        let name = name.into();
        if kind == ColumnKind::Binary && categories.len() != 2 {
            return Err(TableError::Schema(format!(
                "binary column `{name}` must have exactly two categories, got {}",
                categories.len()
            )));
        }
        if !kind.is_encoded() {
            return Err(TableError::Schema(format!(
                "column `{name}`: from_raw requires a categorical/ordinal/binary kind"
            )));
        }
        let cells = raw
            .iter()
            .map(|v| match v {
                None => Cell::Missing,
                Some(s) if s.is_empty() => Cell::Missing,
                Some(s) => match categories.iter().position(|c| c == s) {
                    Some(idx) => Cell::Category(idx as u32),
                    None => Cell::Invalid((*s).to_string()),
                },
            })
            .collect();
        Ok(Column {
            name,
            kind,
            categories,
            cells,
        })
    }

    pub fn text(name: impl Into<String>, raw: &[Option<&str>]) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Text,
            categories: Vec::new(),
            cells: raw
                .iter()
                .map(|v| match v {
                    None => Cell::Missing,
                    Some(s) if s.is_empty() => Cell::Missing,
                    Some(s) => Cell::Text((*s).to_string()),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The display string of a non-missing, valid cell: the category string
    /// for encoded columns, the text for text columns, a formatted number
    /// for numeric columns.
    pub fn value_str(&self, row: usize) -> Option<String> {
        match &self.cells[row] {
            Cell::Category(idx) => Some(self.categories[*idx as usize].clone()),
            Cell::Text(s) => Some(s.clone()),
            Cell::Number(x) => Some(format_number(*x)),
            Cell::Missing | Cell::Invalid(_) => None,
        }
    }

    /// Integer code of an encoded cell, if present and valid.
    pub fn code(&self, row: usize) -> Option<u32> {
        match &self.cells[row] {
            Cell::Category(idx) => Some(*idx),
            _ => None,
        }
    }

    /// Category strings observed in at least one valid cell, in category order.
    pub fn observed_categories(&self) -> Vec<String> {
        let mut seen = vec![false; self.categories.len()];
        for cell in &self.cells {
            if let Cell::Category(idx) = cell {
                seen[*idx as usize] = true;
            }
        }
        self.categories
            .iter()
            .zip(&seen)
            .filter(|(_, s)| **s)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

pub(crate) fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// One attribute/value pair, the atom of transactions and rules.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Item {
    pub attribute: String,
    pub value: String,
}

impl Item {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

impl std::fmt::Display for Item {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = {}", self.attribute, self.value)
    }
}

/// Deterministic train/test split parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self, TableError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(TableError::Schema(format!(
                "train_fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Maps target categories onto bin labels, e.g. `{1,2} -> good`,
/// `{4,5} -> bad`. Bins keep their declared order; categories must be
/// disjoint across bins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetBinning {
    /// (bin label, member categories), in declaration order.
    pub bins: Vec<(String, Vec<String>)>,
}

impl TargetBinning {
    pub fn new(bins: Vec<(String, Vec<String>)>) -> Result<Self, TableError> {
        let mut seen = std::collections::BTreeSet::new();
        for (_, cats) in &bins {
            for c in cats {
                if !seen.insert(c.clone()) {
                    return Err(TableError::Schema(format!(
                        "target binning maps category `{c}` to more than one bin"
                    )));
                }
            }
        }
        Ok(TargetBinning { bins })
    }

    pub fn bin_of(&self, category: &str) -> Option<&str> {
        self.bins
            .iter()
            .find(|(_, cats)| cats.iter().any(|c| c == category))
            .map(|(label, _)| label.as_str())
    }
}

/// A dataset of columns plus a designated target column and stable row ids.
#[derive(Debug, Clone)]
pub struct AugmentedTable {
    columns: Vec<Column>,
    target: String,
    row_ids: Vec<String>,
}

impl AugmentedTable {
    pub fn new(
        columns: Vec<Column>,
        target: impl Into<String>,
        row_ids: Vec<String>,
    ) -> Result<Self, TableError> {
        let target = target.into();
        let n = row_ids.len();
        for col in &columns {
            if col.len() != n {
                return Err(TableError::Schema(format!(
                    "column `{}` has {} cells, expected {}",
                    col.name,
                    col.len(),
                    n
                )));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for col in &columns {
            if !names.insert(col.name.clone()) {
                return Err(TableError::Schema(format!(
                    "duplicate column name `{}`",
                    col.name
                )));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for id in &row_ids {
            if id.is_empty() || id.contains('|') {
                return Err(TableError::Schema(format!(
                    "row id `{id}` is empty or contains the reserved `|` separator"
                )));
            }
            if !ids.insert(id.clone()) {
                return Err(TableError::Schema(format!("duplicate row id `{id}`")));
            }
        }
        let target_col = columns
            .iter()
            .find(|c| c.name == target)
            .ok_or_else(|| TableError::Schema(format!("target column `{target}` not found")))?;
        if !target_col.kind.is_encoded() {
            return Err(TableError::Schema(format!(
                "target column `{target}` must be categorical/ordinal/binary, got {:?}",
                target_col.kind
            )));
        }
        Ok(AugmentedTable {
            columns,
            target,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn target_name(&self) -> &str {
        &self.target
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target_column(&self) -> &Column {
        self.column(&self.target).expect("target column present")
    }

    pub fn row_index(&self, row_id: &str) -> Option<usize> {
        self.row_ids.iter().position(|id| id == row_id)
    }

    /// All invalid cells as (row id, column name, offending raw value).
    pub fn invalid_cells(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for col in &self.columns {
            for (row, cell) in col.cells.iter().enumerate() {
                if let Cell::Invalid(raw) = cell {
                    out.push((self.row_ids[row].clone(), col.name.clone(), raw.clone()));
                }
            }
        }
        out
    }

    /// New table keeping only the rows at `indices` (ascending order expected).
    pub fn subset(&self, indices: &[usize]) -> AugmentedTable {
        let columns = self
            .columns
            .iter()
            .map(|col| Column {
                name: col.name.clone(),
                kind: col.kind,
                categories: col.categories.clone(),
                cells: indices.iter().map(|&i| col.cells[i].clone()).collect(),
            })
            .collect();
        let row_ids = indices.iter().map(|&i| self.row_ids[i].clone()).collect();
        AugmentedTable {
            columns,
            target: self.target.clone(),
            row_ids,
        }
    }

    /// Replace or append a column. The column must match the row count.
    pub fn with_column(&self, column: Column) -> Result<AugmentedTable, TableError> {
        if column.len() != self.n_rows() {
            return Err(TableError::Schema(format!(
                "column `{}` has {} cells, expected {}",
                column.name,
                column.len(),
                self.n_rows()
            )));
        }
        let mut columns: Vec<Column> = self
            .columns
            .iter()
            .filter(|c| c.name != column.name)
            .cloned()
            .collect();
        columns.push(column);
        AugmentedTable::new(columns, self.target.clone(), self.row_ids.clone())
    }
}
