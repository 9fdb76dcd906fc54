//! CSV input and output.
//!
//! Input: UTF-8, header row, comma-delimited, RFC-4180 quoting. Empty cells
//! load as missing. Output: encoded columns are written twice, original
//! string plus a `_code` column, with a JSON schema sidecar so the table
//! reloads with identical kinds and category order.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AugmentedTable, Cell, Column, ColumnKind, TableError};

/// Declared kind (and category space) for one column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnHint {
    pub kind: ColumnKind,
    /// Explicit category list. Values outside it are flagged invalid. When
    /// absent, categories are inferred as the sorted distinct values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

/// Schema used when loading a CSV and persisted as the export sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableSchema {
    pub target: String,
    /// Column holding stable row ids; generated (`r000000`, ...) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_id_column: Option<String>,
    #[serde(default)]
    pub hints: BTreeMap<String, ColumnHint>,
    /// Derived `_code` columns to ignore on reload.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub code_columns: Vec<String>,
}

impl TableSchema {
    pub fn new(target: impl Into<String>) -> Self {
        TableSchema {
            target: target.into(),
            row_id_column: None,
            hints: BTreeMap::new(),
            code_columns: Vec::new(),
        }
    }

    pub fn with_hint(mut self, column: impl Into<String>, hint: ColumnHint) -> Self {
        self.hints.insert(column.into(), hint);
        self
    }
}

/// Distinct-value limits for kind inference of unhinted columns.
const INFER_MAX_CATEGORIES: usize = 50;
const INFER_MAX_VALUE_LEN: usize = 64;

/// Load a CSV file into a table.
///
/// Column kinds come from `schema.hints` when declared and are inferred
/// otherwise: numeric when every non-missing value parses as a number, else
/// categorical when the distinct values are few and short, else text. The
/// target column always loads as categorical (or its hinted kind). Missing
/// cells stay missing; values outside a hinted category space are flagged
/// invalid, never dropped.
pub fn load_csv(path: impl AsRef<Path>, schema: &TableSchema) -> Result<AugmentedTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path.as_ref())
        .map_err(|e| TableError::Parse {
            row: 0,
            msg: e.to_string(),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| TableError::Parse {
            row: 0,
            msg: e.to_string(),
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        return Err(TableError::Parse {
            row: 0,
            msg: "empty file or missing header row".into(),
        });
    }

    let mut raw_columns: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| TableError::Parse {
            row: i + 1,
            msg: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(TableError::Parse {
                row: i + 1,
                msg: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            raw_columns[j].push(if field.is_empty() {
                None
            } else {
                Some(field.to_string())
            });
        }
    }
    let n_rows = raw_columns.first().map(|c| c.len()).unwrap_or(0);

    if !headers.iter().any(|h| *h == schema.target) {
        return Err(TableError::Schema(format!(
            "target column `{}` not present in header {:?}",
            schema.target, headers
        )));
    }
    if let Some(id_col) = &schema.row_id_column {
        if !headers.iter().any(|h| h == id_col) {
            return Err(TableError::Schema(format!(
                "row id column `{id_col}` not present in header"
            )));
        }
    }

    let row_ids: Vec<String> = match &schema.row_id_column {
        Some(id_col) => {
            let idx = headers.iter().position(|h| h == id_col).unwrap();
            raw_columns[idx]
                .iter()
                .enumerate()
                .map(|(row, v)| {
                    v.clone().ok_or(TableError::Parse {
                        row: row + 1,
                        msg: format!("missing row id in column `{id_col}`"),
                    })
                })
                .collect::<Result<_, _>>()?
        }
        None => (0..n_rows).map(|i| format!("r{i:06}")).collect(),
    };

    let mut columns = Vec::new();
    for (j, name) in headers.iter().enumerate() {
        if schema.row_id_column.as_deref() == Some(name.as_str()) {
            continue;
        }
        if schema.code_columns.iter().any(|c| c == name) {
            continue;
        }
        let raw: Vec<Option<&str>> = raw_columns[j].iter().map(|v| v.as_deref()).collect();
        let column = match schema.hints.get(name) {
            Some(hint) => build_hinted(name, hint, &raw)?,
            None if *name == schema.target => {
                Column::from_raw(name, ColumnKind::Categorical, distinct_sorted(&raw), &raw)?
            }
            None => infer_column(name, &raw)?,
        };
        columns.push(column);
    }

    AugmentedTable::new(columns, schema.target.clone(), row_ids)
}

fn build_hinted(name: &str, hint: &ColumnHint, raw: &[Option<&str>]) -> Result<Column, TableError> {
    match hint.kind {
        ColumnKind::Text => Ok(Column::text(name, raw)),
        ColumnKind::Numeric => numeric_column(name, raw),
        kind => {
            let categories = match &hint.categories {
                Some(c) => c.clone(),
                None => distinct_sorted(raw),
            };
            Column::from_raw(name, kind, categories, raw)
        }
    }
}

fn numeric_column(name: &str, raw: &[Option<&str>]) -> Result<Column, TableError> {
    let mut cells = Vec::with_capacity(raw.len());
    for (row, v) in raw.iter().enumerate() {
        cells.push(match v {
            None => Cell::Missing,
            Some(s) => match s.trim().parse::<f64>() {
                Ok(x) => Cell::Number(x),
                Err(_) => {
                    return Err(TableError::Parse {
                        row: row + 1,
                        msg: format!("column `{name}`: `{s}` is not numeric"),
                    })
                }
            },
        });
    }
    Ok(Column {
        name: name.to_string(),
        kind: ColumnKind::Numeric,
        categories: Vec::new(),
        cells,
    })
}

fn distinct_sorted(raw: &[Option<&str>]) -> Vec<String> {
    let mut set: Vec<String> = raw
        .iter()
        .flatten()
        .map(|s| s.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    set.sort();
    set
}

fn infer_column(name: &str, raw: &[Option<&str>]) -> Result<Column, TableError> {
    let non_missing: Vec<&str> = raw.iter().flatten().copied().collect();
    if !non_missing.is_empty()
        && non_missing.iter().all(|s| s.trim().parse::<f64>().is_ok())
    {
        return numeric_column(name, raw);
    }
    let distinct = distinct_sorted(raw);
    let short = non_missing.iter().all(|s| s.len() <= INFER_MAX_VALUE_LEN);
    if !distinct.is_empty() && distinct.len() <= INFER_MAX_CATEGORIES && short {
        Column::from_raw(name, ColumnKind::Categorical, distinct, raw)
    } else {
        Ok(Column::text(name, raw))
    }
}

/// Write the table as CSV plus a schema sidecar (`<stem>.schema.json`).
///
/// Encoded columns produce two fields: the category string and a `_code`
/// field with the 0-based code. Missing cells are empty in both; invalid
/// cells keep their raw string with an empty code.
pub fn write_csv(table: &AugmentedTable, path: impl AsRef<Path>) -> Result<(), TableError> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| TableError::Parse {
        row: 0,
        msg: e.to_string(),
    })?;

    let mut header: Vec<String> = vec!["row_id".into()];
    let mut code_columns = Vec::new();
    for col in table.columns() {
        header.push(col.name.clone());
        if col.kind.is_encoded() {
            let code_name = format!("{}_code", col.name);
            header.push(code_name.clone());
            code_columns.push(code_name);
        }
    }
    writer
        .write_record(&header)
        .map_err(|e| TableError::Parse {
            row: 0,
            msg: e.to_string(),
        })?;

    for row in 0..table.n_rows() {
        let mut record: Vec<String> = vec![table.row_ids()[row].clone()];
        for col in table.columns() {
            match &col.cells[row] {
                Cell::Missing => {
                    record.push(String::new());
                    if col.kind.is_encoded() {
                        record.push(String::new());
                    }
                }
                Cell::Category(idx) => {
                    record.push(col.categories[*idx as usize].clone());
                    record.push(idx.to_string());
                }
                Cell::Invalid(raw) => {
                    record.push(raw.clone());
                    record.push(String::new());
                }
                Cell::Text(s) => record.push(s.clone()),
                Cell::Number(x) => record.push(super::format_number(*x)),
            }
        }
        writer
            .write_record(&record)
            .map_err(|e| TableError::Parse {
                row: row + 1,
                msg: e.to_string(),
            })?;
    }
    writer.flush()?;

    let schema = TableSchema {
        target: table.target_name().to_string(),
        row_id_column: Some("row_id".into()),
        hints: table
            .columns()
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    ColumnHint {
                        kind: c.kind,
                        categories: if c.kind.is_encoded() {
                            Some(c.categories.clone())
                        } else {
                            None
                        },
                    },
                )
            })
            .collect(),
        code_columns,
    };
    let sidecar = sidecar_path(path);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&schema).unwrap() + "\n")?;
    Ok(())
}

/// Reload a CSV written by [`write_csv`] using its schema sidecar.
pub fn load_csv_with_sidecar(path: impl AsRef<Path>) -> Result<AugmentedTable, TableError> {
    let path = path.as_ref();
    let sidecar = sidecar_path(path);
    let text = std::fs::read_to_string(&sidecar).map_err(|e| {
        TableError::Schema(format!(
            "cannot read schema sidecar {}: {e}",
            sidecar.display()
        ))
    })?;
    let schema: TableSchema = serde_json::from_str(&text)
        .map_err(|e| TableError::Schema(format!("schema sidecar: {e}")))?;
    load_csv(path, &schema)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("schema.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new()
            .suffix(".csv")
            .tempfile()
            .unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_text_categorical_target() {
        let f = write_tmp(
            "abstract,rigor,target\n\
             A long abstract about coronaviruses and their spread in families.,high,1\n\
             Another piece of text that is long enough to be prose not a label.,medium,0\n\
             Yet another abstract with many words on methodological soundness.,low,1\n\
             Short sentences can still form a perfectly serviceable abstract.,medium,0\n\
             The fifth abstract closes out this miniature corpus of examples.,high,1\n",
        );
        let schema = TableSchema::new("target").with_hint(
            "rigor",
            ColumnHint {
                kind: ColumnKind::Categorical,
                categories: Some(vec!["low".into(), "medium".into(), "high".into()]),
            },
        );
        let t = load_csv(f.path(), &schema).unwrap();
        assert_eq!(t.n_rows(), 5);
        assert_eq!(t.column("abstract").unwrap().kind, ColumnKind::Text);
        assert_eq!(t.column("rigor").unwrap().kind, ColumnKind::Categorical);
        assert_eq!(t.target_column().kind, ColumnKind::Categorical);
        assert_eq!(t.row_ids()[0], "r000000");
    }

    #[test]
    fn out_of_space_cell_flagged_with_row_id() {
        let f = write_tmp("text,rigor,target\nfoo,extreme,1\nbar,high,0\n");
        let schema = TableSchema::new("target").with_hint(
            "rigor",
            ColumnHint {
                kind: ColumnKind::Categorical,
                categories: Some(vec!["low".into(), "medium".into(), "high".into()]),
            },
        );
        let t = load_csv(f.path(), &schema).unwrap();
        let invalid = t.invalid_cells();
        assert_eq!(invalid.len(), 1);
        assert_eq!(invalid[0].0, "r000000");
        assert_eq!(invalid[0].2, "extreme");
    }

    #[test]
    fn empty_file_is_parse_error() {
        let f = write_tmp("");
        let err = load_csv(f.path(), &TableSchema::new("target")).unwrap_err();
        match err {
            TableError::Parse { .. } | TableError::Schema(_) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_target_is_schema_error() {
        let f = write_tmp("a,b\n1,2\n");
        let err = load_csv(f.path(), &TableSchema::new("target")).unwrap_err();
        assert!(matches!(err, TableError::Schema(_)));
    }

    #[test]
    fn ragged_row_reports_row_number() {
        let f = write_tmp("a,target\n1,2\n3\n");
        let err = load_csv(f.path(), &TableSchema::new("target")).unwrap_err();
        match err {
            TableError::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn export_reload_round_trip() {
        let f = write_tmp("text,rigor,target\nsome words here,high,1\nother words,low,0\n,medium,1\n");
        let schema = TableSchema::new("target").with_hint(
            "rigor",
            ColumnHint {
                kind: ColumnKind::Ordinal,
                categories: Some(vec!["low".into(), "medium".into(), "high".into()]),
            },
        );
        let t = load_csv(f.path(), &schema).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("export.csv");
        write_csv(&t, &out).unwrap();
        let reloaded = load_csv_with_sidecar(&out).unwrap();

        assert_eq!(reloaded.n_rows(), t.n_rows());
        assert_eq!(reloaded.row_ids(), t.row_ids());
        let rigor = reloaded.column("rigor").unwrap();
        assert_eq!(rigor.kind, ColumnKind::Ordinal);
        assert_eq!(rigor.categories, vec!["low", "medium", "high"]);
        assert_eq!(rigor.code(0), Some(2));
        assert_eq!(rigor.code(1), Some(0));
        // csv round trip keeps missing cells missing
        assert_eq!(reloaded.column("text").unwrap().value_str(2), None);
    }
}
