//! Baseline representations, trivial classifiers and the metric suite.

mod fuse;
mod naive;
mod tfidf;

pub use fuse::{fuse_features, table_to_matrix};
pub use naive::{naive_bayes_fit, naive_classifier, NaiveBayes, NaiveClassifier, NaiveMode};
pub use tfidf::{fit_tfidf, transform, TfidfModel, TfidfSettings};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("empty input: {0}")]
    Empty(String),
    #[error("row alignment: {0}")]
    Alignment(String),
    #[error("ordinal metrics: {0}")]
    Ordinal(String),
    #[error("{0}")]
    Invalid(String),
}

/// Sparse row-major feature matrix with named columns and stable row ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub column_names: Vec<String>,
    /// Per row: (column index, weight), sorted by column index.
    rows: Vec<Vec<(u32, f64)>>,
}

impl FeatureMatrix {
    pub fn new(
        row_ids: Vec<String>,
        column_names: Vec<String>,
        rows: Vec<Vec<(u32, f64)>>,
    ) -> Result<Self, EvalError> {
        if rows.len() != row_ids.len() {
            return Err(EvalError::Alignment(format!(
                "{} rows of data for {} row ids",
                rows.len(),
                row_ids.len()
            )));
        }
        let n_cols = column_names.len() as u32;
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|(c, _)| *c >= n_cols) {
                return Err(EvalError::Invalid(format!(
                    "row {i} references a column out of range"
                )));
            }
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(EvalError::Invalid(format!("row {i} is not sorted by column")));
            }
        }
        Ok(FeatureMatrix {
            row_ids,
            column_names,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    /// Horizontal concatenation; both sides must list identical row ids in
    /// identical order.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix, EvalError> {
        if self.row_ids != other.row_ids {
            return Err(EvalError::Alignment(
                "row ids differ between the two matrices".into(),
            ));
        }
        let offset = self.n_cols() as u32;
        let column_names: Vec<String> = self
            .column_names
            .iter()
            .cloned()
            .chain(other.column_names.iter().cloned())
            .collect();
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut row = a.clone();
                row.extend(b.iter().map(|(c, w)| (c + offset, *w)));
                row
            })
            .collect();
        FeatureMatrix::new(self.row_ids.clone(), column_names, rows)
    }
}

/// One prediction against the known truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub row_id: String,
    pub predicted: String,
    pub truth: String,
}

/// Classification metrics. F1/precision/recall are macro-averaged over the
/// classes present in the truth; `weighted_f1` weights classes by their
/// truth frequency. `mae` is present only for ordinal evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
}

/// Compute the metric suite.
///
/// `ordinal_order`, when given, turns on MAE: every truth and predicted
/// category must appear in the ordered list and MAE is taken over the
/// integer codes. A class never predicted has precision 0 by convention.
pub fn evaluate(
    preds: &[Prediction],
    ordinal_order: Option<&[String]>,
) -> Result<MetricsReport, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::Empty("no predictions".into()));
    }
    let n = preds.len();
    let correct = preds.iter().filter(|p| p.predicted == p.truth).count();

    let mut classes: Vec<&str> = preds.iter().map(|p| p.truth.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut macro_p = 0.0;
    let mut macro_r = 0.0;
    let mut macro_f1 = 0.0;
    let mut weighted_f1 = 0.0;
    for &class in &classes {
        let tp = preds
            .iter()
            .filter(|p| p.predicted == class && p.truth == class)
            .count() as f64;
        let fp = preds
            .iter()
            .filter(|p| p.predicted == class && p.truth != class)
            .count() as f64;
        let truth_count = preds.iter().filter(|p| p.truth == class).count() as f64;
        let fn_ = truth_count - tp;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = tp / (tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        macro_p += precision;
        macro_r += recall;
        macro_f1 += f1;
        weighted_f1 += f1 * truth_count / n as f64;
    }
    let k = classes.len() as f64;

    let mae = match ordinal_order {
        None => None,
        Some(order) => {
            let code = |c: &str| -> Result<f64, EvalError> {
                order
                    .iter()
                    .position(|o| o == c)
                    .map(|i| i as f64)
                    .ok_or_else(|| {
                        EvalError::Ordinal(format!(
                            "category `{c}` is not in the ordinal order; the target is not ordinal"
                        ))
                    })
            };
            let mut total = 0.0;
            for p in preds {
                total += (code(&p.truth)? - code(&p.predicted)?).abs();
            }
            Some(total / n as f64)
        }
    };

    Ok(MetricsReport {
        n,
        accuracy: correct as f64 / n as f64,
        macro_f1: macro_f1 / k,
        weighted_f1,
        macro_precision: macro_p / k,
        macro_recall: macro_r / k,
        mae,
    })
}
