//! Trivial baselines and a multinomial Naive Bayes stand-in classifier.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EvalError, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveMode {
    /// Always predict the modal training class (ties break to the
    /// lexicographically smallest).
    MostFrequent,
    /// Predict uniformly at random over the observed classes (seeded).
    Uniform,
}

/// A classifier that ignores features entirely.
#[derive(Debug, Clone)]
pub struct NaiveClassifier {
    mode: NaiveMode,
    classes: Vec<String>,
    modal: String,
    seed: u64,
}

pub fn naive_classifier(
    train_targets: &[String],
    mode: NaiveMode,
    seed: u64,
) -> Result<NaiveClassifier, EvalError> {
    if train_targets.is_empty() {
        return Err(EvalError::Empty("no training targets".into()));
    }
    let mut classes: Vec<String> = train_targets.to_vec();
    classes.sort();
    classes.dedup();
    // ties break to the first class in sorted order
    let mut modal = classes[0].clone();
    let mut best = 0usize;
    for class in &classes {
        let count = train_targets.iter().filter(|t| *t == class).count();
        if count > best {
            best = count;
            modal = class.clone();
        }
    }
    Ok(NaiveClassifier {
        mode,
        classes,
        modal,
        seed,
    })
}

impl NaiveClassifier {
    /// Predict `n` labels. The uniform mode draws a fresh seeded stream, so
    /// repeated calls are reproducible.
    pub fn predict(&self, n: usize) -> Vec<String> {
        match self.mode {
            NaiveMode::MostFrequent => vec![self.modal.clone(); n],
            NaiveMode::Uniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..n)
                    .map(|_| self.classes[rng.gen_range(0..self.classes.len())].clone())
                    .collect()
            }
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }
}

/// Multinomial Naive Bayes with add-one smoothing over non-negative feature
/// weights (term counts, TF-IDF weights or encoded categoricals).
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    classes: Vec<String>,
    log_prior: Vec<f64>,
    /// log_likelihood[class][feature]
    log_likelihood: Vec<Vec<f64>>,
}

pub fn naive_bayes_fit(
    features: &FeatureMatrix,
    targets: &[String],
) -> Result<NaiveBayes, EvalError> {
    if features.n_rows() != targets.len() {
        return Err(EvalError::Alignment(format!(
            "{} feature rows for {} targets",
            features.n_rows(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(EvalError::Empty("no training rows".into()));
    }
    let mut classes: Vec<String> = targets.to_vec();
    classes.sort();
    classes.dedup();
    let v = features.n_cols();

    let mut counts = vec![vec![0.0f64; v]; classes.len()];
    let mut class_rows = vec![0usize; classes.len()];
    for (row, target) in targets.iter().enumerate() {
        let c = classes.binary_search(target).expect("class is known");
        class_rows[c] += 1;
        for &(col, w) in features.row(row) {
            if w < 0.0 {
                return Err(EvalError::Invalid(
                    "multinomial model requires non-negative weights".into(),
                ));
            }
            counts[c][col as usize] += w;
        }
    }

    let n = targets.len() as f64;
    let log_prior: Vec<f64> = class_rows.iter().map(|&r| (r as f64 / n).ln()).collect();
    let log_likelihood: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| {
            let total: f64 = row.iter().sum::<f64>() + v as f64; // add-one smoothing
            row.iter().map(|&c| ((c + 1.0) / total).ln()).collect()
        })
        .collect();

    Ok(NaiveBayes {
        classes,
        log_prior,
        log_likelihood,
    })
}

impl NaiveBayes {
    /// Predict a label per row; argmax ties break to the first class in
    /// sorted order, so prediction is deterministic.
    pub fn predict(&self, features: &FeatureMatrix) -> Vec<String> {
        (0..features.n_rows())
            .map(|row| {
                let mut best = 0usize;
                let mut best_score = f64::NEG_INFINITY;
                for (c, prior) in self.log_prior.iter().enumerate() {
                    let mut score = *prior;
                    for &(col, w) in features.row(row) {
                        score += w * self.log_likelihood[c][col as usize];
                    }
                    if score > best_score {
                        best_score = score;
                        best = c;
                    }
                }
                self.classes[best].clone()
            })
            .collect()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }
}
