//! Bag-of-words representation with TF-IDF weighting.
//!
//! Frozen formulas: raw term counts, `idf = ln((1 + N) / (1 + df)) + 1`,
//! and per-document L2 normalization. Golden tests below pin the behavior.

use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{EvalError, FeatureMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfSettings {
    pub lowercase: bool,
    /// Regex matched against the (possibly lowercased) text; every match is
    /// a token.
    pub token_pattern: String,
    /// Tokens in fewer than this many documents are dropped.
    pub min_document_frequency: usize,
    /// L2-normalize each document vector.
    pub l2_normalize: bool,
}

impl Default for TfidfSettings {
    fn default() -> Self {
        TfidfSettings {
            lowercase: true,
            token_pattern: "[a-zA-Z0-9]+".into(),
            min_document_frequency: 1,
            l2_normalize: true,
        }
    }
}

/// Fitted vocabulary and inverse document frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    /// term -> dense column index (terms sorted, indices 0..V-1).
    pub vocabulary: BTreeMap<String, u32>,
    /// Per-term idf, indexed by column.
    pub idf: Vec<f64>,
    pub settings: TfidfSettings,
}

fn tokenizer(settings: &TfidfSettings) -> Result<Regex, EvalError> {
    Regex::new(&settings.token_pattern)
        .map_err(|e| EvalError::Invalid(format!("token_pattern: {e}")))
}

fn tokens(text: &str, settings: &TfidfSettings, re: &Regex) -> Vec<String> {
    let owned;
    let text = if settings.lowercase {
        owned = text.to_lowercase();
        &owned
    } else {
        text
    };
    re.find_iter(text).map(|m| m.as_str().to_string()).collect()
}

/// Fit vocabulary and idf weights on a corpus.
pub fn fit_tfidf(texts: &[&str], settings: &TfidfSettings) -> Result<TfidfModel, EvalError> {
    if texts.is_empty() {
        return Err(EvalError::Empty("empty corpus".into()));
    }
    let re = tokenizer(settings)?;
    let n = texts.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        let distinct: BTreeSet<String> = tokens(text, settings, &re).into_iter().collect();
        for token in distinct {
            *df.entry(token).or_default() += 1;
        }
    }
    df.retain(|_, count| *count >= settings.min_document_frequency);
    if df.is_empty() {
        return Err(EvalError::Empty(
            "vocabulary is empty after frequency filtering".into(),
        ));
    }
    let vocabulary: BTreeMap<String, u32> = df
        .keys()
        .enumerate()
        .map(|(i, term)| (term.clone(), i as u32))
        .collect();
    let mut idf = vec![0.0; vocabulary.len()];
    for (term, &col) in &vocabulary {
        let d = df[term] as f64;
        idf[col as usize] = ((1.0 + n as f64) / (1.0 + d)).ln() + 1.0;
    }
    Ok(TfidfModel {
        vocabulary,
        idf,
        settings: settings.clone(),
    })
}

/// Weight a set of documents with a fitted model. Unseen terms are ignored;
/// a document with no known terms maps to the zero vector.
pub fn transform(
    model: &TfidfModel,
    texts: &[&str],
    row_ids: &[String],
) -> Result<FeatureMatrix, EvalError> {
    if texts.len() != row_ids.len() {
        return Err(EvalError::Alignment(format!(
            "{} texts for {} row ids",
            texts.len(),
            row_ids.len()
        )));
    }
    let re = tokenizer(&model.settings)?;
    let mut rows = Vec::with_capacity(texts.len());
    for text in texts {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for token in tokens(text, &model.settings, &re) {
            if let Some(&col) = model.vocabulary.get(&token) {
                *counts.entry(col).or_default() += 1.0;
            }
        }
        let mut row: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(col, tf)| (col, tf * model.idf[col as usize]))
            .collect();
        if model.settings.l2_normalize {
            let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in &mut row {
                    *w /= norm;
                }
            }
        }
        rows.push(row);
    }
    let column_names: Vec<String> = model.vocabulary.keys().cloned().collect();
    FeatureMatrix::new(row_ids.to_vec(), column_names, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i:06}")).collect()
    }

    #[test]
    fn hand_computed_weights() {
        // corpus ["a b", "a c"]: df(a)=2, df(b)=df(c)=1
        let model = fit_tfidf(&["a b", "a c"], &TfidfSettings::default()).unwrap();
        assert_eq!(model.vocabulary.len(), 3);
        assert_eq!(model.idf[model.vocabulary["a"] as usize], 1.0);
        let idf_b = model.idf[model.vocabulary["b"] as usize];
        assert!((idf_b - 1.4054651081081644).abs() < 1e-12);

        let m = transform(&model, &["a b"], &ids(1)).unwrap();
        let row = m.row(0);
        assert_eq!(row.len(), 2);
        let a_col = model.vocabulary["a"];
        let wa = row.iter().find(|(c, _)| *c == a_col).unwrap().1;
        let wb = row.iter().find(|(c, _)| *c != a_col).unwrap().1;
        assert!((wa - 0.57973867153766573).abs() < 1e-12, "wa={wa}");
        assert!((wb - 0.81480247466716897).abs() < 1e-12, "wb={wb}");
        // unit norm
        let norm: f64 = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_terms_give_zero_vector() {
        let model = fit_tfidf(&["a b", "a c"], &TfidfSettings::default()).unwrap();
        let m = transform(&model, &["z q"], &ids(1)).unwrap();
        assert!(m.row(0).is_empty());
    }

    #[test]
    fn duplicate_documents_get_identical_rows() {
        let model = fit_tfidf(&["x y z", "x y"], &TfidfSettings::default()).unwrap();
        let m = transform(&model, &["x y z", "x y z"], &ids(2)).unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn min_df_filters_vocabulary() {
        let settings = TfidfSettings {
            min_document_frequency: 2,
            ..TfidfSettings::default()
        };
        let model = fit_tfidf(&["a b", "a c"], &settings).unwrap();
        assert_eq!(model.vocabulary.len(), 1);
        assert!(model.vocabulary.contains_key("a"));
    }

    #[test]
    fn empty_vocabulary_is_error() {
        let settings = TfidfSettings {
            min_document_frequency: 5,
            ..TfidfSettings::default()
        };
        assert!(matches!(
            fit_tfidf(&["a b", "a c"], &settings),
            Err(EvalError::Empty(_))
        ));
    }

    #[test]
    fn transform_is_linear_in_counts_before_normalization() {
        let settings = TfidfSettings {
            l2_normalize: false,
            ..TfidfSettings::default()
        };
        let model = fit_tfidf(&["a b", "a c"], &settings).unwrap();
        let single = transform(&model, &["a b"], &ids(1)).unwrap();
        let double = transform(&model, &["a a b b"], &ids(1)).unwrap();
        for ((c1, w1), (c2, w2)) in single.row(0).iter().zip(double.row(0)) {
            assert_eq!(c1, c2);
            assert!((2.0 * w1 - w2).abs() < 1e-12);
        }
    }

    #[test]
    fn lowercasing_folds_tokens() {
        let model = fit_tfidf(&["Apple apple APPLE"], &TfidfSettings::default()).unwrap();
        assert_eq!(model.vocabulary.len(), 1);
    }
}
