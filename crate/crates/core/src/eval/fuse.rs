//! Encoding tables as feature matrices and fusing them with TF-IDF weights.

use crate::tabular::{AugmentedTable, Cell, ColumnKind};

use super::{EvalError, FeatureMatrix};

/// Encode a table's feature columns as a matrix: ordinal and binary columns
/// contribute their integer code, categorical columns are one-hot expanded
/// (`name=value`), numeric columns pass through. Text columns and the
/// columns in `exclude` (typically the target) are skipped.
pub fn table_to_matrix(
    table: &AugmentedTable,
    exclude: &[&str],
) -> Result<FeatureMatrix, EvalError> {
    let mut column_names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); table.n_rows()];

    for col in table.columns() {
        if exclude.contains(&col.name.as_str()) || col.kind == ColumnKind::Text {
            continue;
        }
        match col.kind {
            ColumnKind::Ordinal | ColumnKind::Binary => {
                let idx = column_names.len() as u32;
                column_names.push(col.name.clone());
                for (row, out) in rows.iter_mut().enumerate() {
                    if let Some(code) = col.code(row) {
                        if code > 0 {
                            out.push((idx, code as f64));
                        }
                    }
                }
            }
            ColumnKind::Categorical => {
                let base = column_names.len() as u32;
                for cat in &col.categories {
                    column_names.push(format!("{}={}", col.name, cat));
                }
                for (row, out) in rows.iter_mut().enumerate() {
                    if let Some(code) = col.code(row) {
                        out.push((base + code, 1.0));
                    }
                }
            }
            ColumnKind::Numeric => {
                let idx = column_names.len() as u32;
                column_names.push(col.name.clone());
                for (row, out) in rows.iter_mut().enumerate() {
                    if let Cell::Number(x) = col.cells[row] {
                        if x != 0.0 {
                            out.push((idx, x));
                        }
                    }
                }
            }
            ColumnKind::Text => unreachable!(),
        }
    }

    FeatureMatrix::new(table.row_ids().to_vec(), column_names, rows)
}

/// Append TF-IDF term weights to a table's encoded features. Rows are
/// aligned by row id and must appear in the same order in both inputs.
pub fn fuse_features(
    llm_table: &AugmentedTable,
    tfidf: &FeatureMatrix,
) -> Result<FeatureMatrix, EvalError> {
    let target = llm_table.target_name().to_string();
    let llm = table_to_matrix(llm_table, &[target.as_str()])?;
    llm.hstack(tfidf)
}
