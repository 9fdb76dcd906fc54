//! Pure operations over tables: ordinal encoding, multilabel expansion,
//! deterministic splitting, target binning, transaction view, stratified
//! downsampling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AugmentedTable, Cell, Column, ColumnKind, Item, SplitSpec, TableError, TargetBinning};
use crate::util::snake_case;

/// Re-encode a column as ordinal with the given category order. Codes become
/// 0..k-1 in `order`; the original strings stay available through the
/// category list. Non-missing values outside `order` are an error listing
/// the offending row positions.
pub fn encode_ordinal(col: &Column, order: &[String]) -> Result<Column, TableError> {
    let mut cells = Vec::with_capacity(col.len());
    let mut bad_rows: Vec<usize> = Vec::new();
    let mut bad_value = String::new();
    for (row, cell) in col.cells.iter().enumerate() {
        let value = match cell {
            Cell::Missing => {
                cells.push(Cell::Missing);
                continue;
            }
            Cell::Category(idx) => col.categories[*idx as usize].clone(),
            Cell::Text(s) => s.clone(),
            Cell::Number(x) => super::format_number(*x),
            Cell::Invalid(raw) => raw.clone(),
        };
        match order.iter().position(|c| *c == value) {
            Some(idx) => cells.push(Cell::Category(idx as u32)),
            None => {
                if bad_rows.is_empty() {
                    bad_value = value;
                }
                bad_rows.push(row);
                cells.push(Cell::Missing);
            }
        }
    }
    if !bad_rows.is_empty() {
        return Err(TableError::Encoding {
            column: col.name.clone(),
            value: bad_value,
            rows: bad_rows,
        });
    }
    let kind = if order.len() == 2 {
        ColumnKind::Binary
    } else {
        ColumnKind::Ordinal
    };
    Ok(Column {
        name: col.name.clone(),
        kind,
        categories: order.to_vec(),
        cells,
    })
}

/// Expand a set-valued column into one binary column per label. Cells hold
/// zero or more labels separated by `separator`; a row's code is 1 iff the
/// label is present. Column names are snake_case of the label and must be
/// unique. A label outside `labels` is an error naming label and row.
pub fn explode_multilabel(
    col: &Column,
    labels: &[String],
    separator: char,
) -> Result<Vec<Column>, TableError> {
    let names: Vec<String> = labels.iter().map(|l| snake_case(l)).collect();
    {
        let mut seen = std::collections::BTreeSet::new();
        for (label, name) in labels.iter().zip(&names) {
            if name.is_empty() || !seen.insert(name.clone()) {
                return Err(TableError::Schema(format!(
                    "label `{label}` normalizes to a duplicate or empty column name `{name}`"
                )));
            }
        }
    }

    let mut presence = vec![vec![false; col.len()]; labels.len()];
    for (row, cell) in col.cells.iter().enumerate() {
        let raw = match cell {
            Cell::Missing => continue,
            Cell::Text(s) => s.clone(),
            Cell::Category(idx) => col.categories[*idx as usize].clone(),
            Cell::Invalid(raw) => raw.clone(),
            Cell::Number(x) => super::format_number(*x),
        };
        for token in raw.split(separator) {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            match labels.iter().position(|l| l == token) {
                Some(idx) => presence[idx][row] = true,
                None => {
                    return Err(TableError::UnknownLabel {
                        column: col.name.clone(),
                        label: token.to_string(),
                        row,
                    })
                }
            }
        }
    }

    Ok(names
        .into_iter()
        .enumerate()
        .map(|(i, name)| Column {
            name,
            kind: ColumnKind::Binary,
            categories: vec!["0".into(), "1".into()],
            cells: presence[i]
                .iter()
                .map(|&p| Cell::Category(p as u32))
                .collect(),
        })
        .collect())
}

/// Deterministic train/test split: row indices are shuffled with a
/// ChaCha8 stream seeded from `spec.seed` (Fisher-Yates via `rand`,
/// version pinned in Cargo.toml), the first `round(n * train_fraction)`
/// shuffled rows form the train partition, and both partitions keep the
/// original row order.
pub fn split(
    table: &AugmentedTable,
    spec: &SplitSpec,
) -> Result<(AugmentedTable, AugmentedTable), TableError> {
    let n = table.n_rows();
    if n < 2 {
        return Err(TableError::Schema(format!(
            "split requires at least 2 rows, got {n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);

    let n_train = (n as f64 * spec.train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(TableError::EmptySplit {
            n_rows: n,
            fraction: spec.train_fraction,
        });
    }
    let mut train: Vec<usize> = indices[..n_train].to_vec();
    let mut test: Vec<usize> = indices[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((table.subset(&train), table.subset(&test)))
}

/// Replace the target column with bin labels per `binning`. Rows whose
/// target category has no bin get a missing target cell; they stay in the
/// table but drop out of mining, which skips rows without a target item.
pub fn bin_target(
    table: &AugmentedTable,
    binning: &TargetBinning,
) -> Result<AugmentedTable, TableError> {
    let target = table.target_column();
    for (_, cats) in &binning.bins {
        for c in cats {
            if !target.categories.iter().any(|tc| tc == c) {
                return Err(TableError::Schema(format!(
                    "binning maps `{c}` which is not a category of target `{}`",
                    target.name
                )));
            }
        }
    }
    let bin_labels: Vec<String> = binning.bins.iter().map(|(label, _)| label.clone()).collect();
    let cells = target
        .cells
        .iter()
        .map(|cell| match cell {
            Cell::Category(idx) => {
                let cat = &target.categories[*idx as usize];
                match binning.bin_of(cat) {
                    Some(label) => {
                        let bin_idx = bin_labels.iter().position(|l| l == label).unwrap();
                        Cell::Category(bin_idx as u32)
                    }
                    None => Cell::Missing,
                }
            }
            other => other.clone(),
        })
        .collect();
    let kind = if bin_labels.len() == 2 {
        ColumnKind::Binary
    } else {
        ColumnKind::Categorical
    };
    table.with_column(Column {
        name: target.name.clone(),
        kind,
        categories: bin_labels,
        cells,
    })
}

/// Transaction view: each row becomes the set of (attribute, value) items
/// over the categorical/ordinal/binary columns, target included. Missing
/// and invalid cells simply omit the attribute.
pub fn to_transactions(table: &AugmentedTable) -> Vec<Vec<Item>> {
    let encoded: Vec<&Column> = table
        .columns()
        .iter()
        .filter(|c| c.kind.is_encoded())
        .collect();
    (0..table.n_rows())
        .map(|row| {
            encoded
                .iter()
                .filter_map(|col| {
                    col.code(row)
                        .map(|idx| Item::new(&col.name, &col.categories[idx as usize]))
                })
                .collect()
        })
        .collect()
}

/// Seeded stratified downsample: keep `per_class` rows of every target
/// category (error when a class is smaller). Classes are processed in
/// category order with one ChaCha8 stream, so the result is deterministic.
pub fn stratified_downsample(
    table: &AugmentedTable,
    per_class: usize,
    seed: u64,
) -> Result<AugmentedTable, TableError> {
    let target = table.target_column();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = Vec::new();
    for (cat_idx, cat) in target.categories.iter().enumerate() {
        let mut rows: Vec<usize> = (0..table.n_rows())
            .filter(|&r| target.code(r) == Some(cat_idx as u32))
            .collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < per_class {
            return Err(TableError::Schema(format!(
                "class `{cat}` has {} rows, fewer than per_class {per_class}",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        keep.extend_from_slice(&rows[..per_class]);
    }
    keep.sort_unstable();
    Ok(table.subset(&keep))
}
