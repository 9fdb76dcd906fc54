//! Statistical validation of generated features against the target:
//! chi-squared independence test with bootstrap replication, Cramér's V
//! effect size, SMOG readability, and Pearson/Spearman correlation.

mod gamma;
mod smog;

pub use gamma::{chi_squared_sf, gamma_p, gamma_q, ln_gamma};
pub use smog::{count_sentences, smog_index, syllables};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tabular::{AugmentedTable, Column};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("degenerate contingency table: {0}")]
    Degenerate(String),
    #[error("zero expected cell count after marginal pruning")]
    ZeroExpected,
    #[error("column `{0}` not found or not categorical")]
    BadColumn(String),
    #[error("no sentences detected")]
    NoSentences,
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
}

/// Cross-tabulation of two categorical columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// counts[i][j] = rows with feature = row_labels[i] and target = col_labels[j]
    pub counts: Vec<Vec<u64>>,
    /// Total count over all cells.
    pub n: u64,
    /// Rows excluded for a missing value in either column.
    pub excluded: u64,
}

impl ContingencyTable {
    pub fn from_counts(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Self {
        let n = counts.iter().flatten().sum();
        ContingencyTable {
            row_labels,
            col_labels,
            counts,
            n,
            excluded: 0,
        }
    }
}

/// Per-feature validation result: full-table test statistics plus the
/// bootstrap significant fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTestResult {
    pub feature: String,
    pub chi2: f64,
    pub dof: u32,
    pub p_value: f64,
    pub cramers_v: f64,
    /// `***` p < 0.001, `**` p < 0.01, `*` p < 0.05, empty otherwise.
    pub stars: String,
    pub bootstrap_significant_fraction: f64,
    /// Resamples where the test degenerated (a column collapsed to a single
    /// observed category); counted as non-significant.
    pub bootstrap_degenerate: u64,
}

/// Significance stars for a p-value.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Build the feature x target contingency table. Rows missing or invalid in
/// either column are excluded and counted. Labels cover only observed
/// categories; a feature with fewer than two observed categories is an error.
pub fn contingency(
    table: &AugmentedTable,
    feature: &str,
    target: &str,
) -> Result<ContingencyTable, StatsError> {
    let fcol = encoded_column(table, feature)?;
    let tcol = encoded_column(table, target)?;
    contingency_of_columns(fcol, tcol, None)
}

fn encoded_column<'t>(table: &'t AugmentedTable, name: &str) -> Result<&'t Column, StatsError> {
    table
        .column(name)
        .filter(|c| c.kind.is_encoded())
        .ok_or_else(|| StatsError::BadColumn(name.to_string()))
}

/// Contingency over an optional row subset (`rows` may repeat indices, as in
/// bootstrap resamples).
fn contingency_of_columns(
    fcol: &Column,
    tcol: &Column,
    rows: Option<&[usize]>,
) -> Result<ContingencyTable, StatsError> {
    let mut raw = vec![vec![0u64; tcol.categories.len()]; fcol.categories.len()];
    let mut excluded = 0u64;
    {
        let mut tally = |row: usize| match (fcol.code(row), tcol.code(row)) {
            (Some(i), Some(j)) => raw[i as usize][j as usize] += 1,
            _ => excluded += 1,
        };
        match rows {
            Some(rows) => rows.iter().for_each(|&r| tally(r)),
            None => (0..fcol.len()).for_each(&mut tally),
        }
    }

    let row_keep: Vec<usize> = (0..fcol.categories.len())
        .filter(|&i| raw[i].iter().sum::<u64>() > 0)
        .collect();
    let col_keep: Vec<usize> = (0..tcol.categories.len())
        .filter(|&j| raw.iter().map(|r| r[j]).sum::<u64>() > 0)
        .collect();
    if row_keep.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "feature `{}` has {} observed categories",
            fcol.name,
            row_keep.len()
        )));
    }
    if col_keep.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "target `{}` has {} observed categories",
            tcol.name,
            col_keep.len()
        )));
    }

    let counts: Vec<Vec<u64>> = row_keep
        .iter()
        .map(|&i| col_keep.iter().map(|&j| raw[i][j]).collect())
        .collect();
    let n = counts.iter().flatten().sum();
    Ok(ContingencyTable {
        row_labels: row_keep
            .iter()
            .map(|&i| fcol.categories[i].clone())
            .collect(),
        col_labels: col_keep
            .iter()
            .map(|&j| tcol.categories[j].clone())
            .collect(),
        counts,
        n,
        excluded,
    })
}

/// Pearson chi-squared test of independence. All-zero rows and columns are
/// dropped first (adjusting the degrees of freedom); expected counts come
/// from the row/column marginals and the p-value from the chi-squared
/// upper-tail CDF. No continuity correction is applied.
pub fn chi_squared_test(ct: &ContingencyTable) -> Result<(f64, u32, f64), StatsError> {
    let rows: Vec<&Vec<u64>> = ct
        .counts
        .iter()
        .filter(|r| r.iter().sum::<u64>() > 0)
        .collect();
    if rows.is_empty() {
        return Err(StatsError::Degenerate("empty table".into()));
    }
    let n_cols = rows[0].len();
    let col_totals: Vec<u64> = (0..n_cols)
        .map(|j| rows.iter().map(|r| r[j]).sum())
        .collect();
    let keep_cols: Vec<usize> = (0..n_cols).filter(|&j| col_totals[j] > 0).collect();
    let r = rows.len();
    let c = keep_cols.len();
    if r < 2 || c < 2 {
        return Err(StatsError::Degenerate(format!(
            "table is {r}x{c} after pruning, need at least 2x2"
        )));
    }
    let n: u64 = col_totals.iter().sum();
    let row_totals: Vec<u64> = rows.iter().map(|r| r.iter().sum()).collect();

    let mut chi2 = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for &j in &keep_cols {
            let expected = (row_totals[i] as f64) * (col_totals[j] as f64) / (n as f64);
            if expected <= 0.0 {
                return Err(StatsError::ZeroExpected);
            }
            let observed = row[j] as f64;
            let d = observed - expected;
            chi2 += d * d / expected;
        }
    }
    let dof = ((r - 1) * (c - 1)) as u32;
    let p = chi_squared_sf(chi2, dof as f64);
    Ok((chi2, dof, p))
}

/// Cramér's V effect size: `sqrt(chi2 / (n * (k - 1)))` with k the number of
/// categories in the smaller dimension of the (pruned) table.
pub fn cramers_v(ct: &ContingencyTable) -> Result<f64, StatsError> {
    let (chi2, _, _) = chi_squared_test(ct)?;
    let rows = ct
        .counts
        .iter()
        .filter(|r| r.iter().sum::<u64>() > 0)
        .count();
    let cols = (0..ct.counts[0].len())
        .filter(|&j| ct.counts.iter().map(|r| r[j]).sum::<u64>() > 0)
        .count();
    let k = rows.min(cols);
    Ok((chi2 / (ct.n as f64 * (k as f64 - 1.0))).sqrt())
}

/// Chi-squared test with bootstrap replication.
///
/// Headline statistics come from the full table; `reps` resamples of the
/// rows (with replacement, size n) are each re-tested at `alpha` and the
/// significant fraction is reported. Replicate PRNG streams derive from
/// (seed, replicate index), so results are independent of evaluation order.
/// A degenerate resample counts as non-significant and is tallied.
pub fn bootstrap_test(
    table: &AugmentedTable,
    feature: &str,
    target: &str,
    reps: u32,
    alpha: f64,
    seed: u64,
) -> Result<FeatureTestResult, StatsError> {
    assert!(reps >= 1, "reps must be >= 1");
    let fcol = encoded_column(table, feature)?;
    let tcol = encoded_column(table, target)?;

    let full = contingency_of_columns(fcol, tcol, None)?;
    let (chi2, dof, p_value) = chi_squared_test(&full)?;
    let v = cramers_v(&full)?;

    let n = table.n_rows();
    let mut significant = 0u64;
    let mut degenerate = 0u64;
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64 + 1);
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        match contingency_of_columns(fcol, tcol, Some(&rows)).and_then(|ct| chi_squared_test(&ct))
        {
            Ok((_, _, p)) if p < alpha => significant += 1,
            Ok(_) => {}
            Err(StatsError::Degenerate(_)) | Err(StatsError::ZeroExpected) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }

    Ok(FeatureTestResult {
        feature: feature.to_string(),
        chi2,
        dof,
        p_value,
        cramers_v: v,
        stars: stars(p_value).to_string(),
        bootstrap_significant_fraction: significant as f64 / reps as f64,
        bootstrap_degenerate: degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Correlation of two aligned numeric series. Spearman ranks ties by their
/// average rank.
pub fn correlate(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<f64, StatsError> {
    assert_eq!(x.len(), y.len(), "series must be aligned");
    if x.len() < 3 {
        return Err(StatsError::UndefinedCorrelation(format!(
            "need at least 3 paired observations, got {}",
            x.len()
        )));
    }
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => pearson(&ranks(x), &ranks(y)),
    }
}

/// Correlation of two table columns, using integer codes for encoded columns
/// and raw values for numeric ones, with pairwise missing removal.
pub fn correlate_columns(
    table: &AugmentedTable,
    x: &str,
    y: &str,
    method: CorrelationMethod,
) -> Result<f64, StatsError> {
    let xc = numeric_view(table, x)?;
    let yc = numeric_view(table, y)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, b) in xc.iter().zip(&yc) {
        if let (Some(a), Some(b)) = (a, b) {
            xs.push(*a);
            ys.push(*b);
        }
    }
    correlate(&xs, &ys, method)
}

fn numeric_view(table: &AugmentedTable, name: &str) -> Result<Vec<Option<f64>>, StatsError> {
    let col = table
        .column(name)
        .ok_or_else(|| StatsError::BadColumn(name.to_string()))?;
    if col.kind.is_encoded() {
        Ok((0..col.len())
            .map(|r| col.code(r).map(|c| c as f64))
            .collect())
    } else {
        Ok(col
            .cells
            .iter()
            .map(|cell| match cell {
                crate::tabular::Cell::Number(x) => Some(*x),
                _ => None,
            })
            .collect())
    }
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::UndefinedCorrelation(
            "zero variance in one of the series".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
