//! `evaluate`: train/test split, representation building, classifier
//! training and the metric report.

use std::path::PathBuf;

use featmine::eval::{
    evaluate, fit_tfidf, fuse_features, naive_bayes_fit, naive_classifier, table_to_matrix,
    transform, FeatureMatrix, NaiveMode, Prediction,
};
use featmine::tabular::{split, AugmentedTable, ColumnKind, SplitSpec};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

use super::{ensure_out_dir, load_table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Llm,
    Tfidf,
    Fused,
}

#[derive(Debug, Clone)]
pub enum Classifier {
    NaiveMostFrequent,
    NaiveUniform,
    NaiveBayes,
    /// Predictions CSV (row_id, predicted) produced by an external model.
    External(PathBuf),
}

pub struct EvaluateArgs {
    pub data: PathBuf,
    pub out_dir: PathBuf,
    pub representation: Representation,
    pub classifier: Classifier,
}

pub fn cmd_evaluate(config: &PipelineConfig, args: &EvaluateArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out_dir)?;
    let table = load_table(config, &args.data)?;
    let target_col = table.target_column().clone();

    let ordinal_order: Option<Vec<String>> =
        if config.evaluation.ordinal || target_col.kind == ColumnKind::Ordinal {
            Some(target_col.categories.clone())
        } else {
            None
        };

    let predictions = match &args.classifier {
        Classifier::External(path) => external_predictions(path, &table)?,
        classifier => {
            let spec = SplitSpec::new(config.split.train_fraction, config.split.seed)?;
            let (train, test) = split(&table, &spec)?;
            let truth = |t: &AugmentedTable| -> Vec<String> {
                let col = t.target_column();
                (0..t.n_rows())
                    .map(|r| col.value_str(r).unwrap_or_default())
                    .collect()
            };
            let train_targets = truth(&train);
            let test_targets = truth(&test);

            let predicted: Vec<String> = match classifier {
                Classifier::NaiveMostFrequent | Classifier::NaiveUniform => {
                    let mode = if matches!(classifier, Classifier::NaiveMostFrequent) {
                        NaiveMode::MostFrequent
                    } else {
                        NaiveMode::Uniform
                    };
                    naive_classifier(&train_targets, mode, config.evaluation.seed)?
                        .predict(test.n_rows())
                }
                Classifier::NaiveBayes => {
                    let (train_x, test_x) =
                        build_representation(config, &train, &test, args.representation)?;
                    let model = naive_bayes_fit(&train_x, &train_targets)?;
                    model.predict(&test_x)
                }
                Classifier::External(_) => unreachable!(),
            };
            test.row_ids()
                .iter()
                .zip(predicted)
                .zip(test_targets)
                .map(|((row_id, predicted), truth)| Prediction {
                    row_id: row_id.clone(),
                    predicted,
                    truth,
                })
                .collect()
        }
    };

    let metrics = evaluate(&predictions, ordinal_order.as_deref())?;
    super::write_json(&args.out_dir, "metrics.json", &metrics)?;
    println!(
        "n={} accuracy={:.3} macro_f1={:.3} weighted_f1={:.3} precision={:.3} recall={:.3}{}",
        metrics.n,
        metrics.accuracy,
        metrics.macro_f1,
        metrics.weighted_f1,
        metrics.macro_precision,
        metrics.macro_recall,
        metrics
            .mae
            .map(|m| format!(" mae={m:.3}"))
            .unwrap_or_default()
    );

    let mut manifest = RunManifest::new("evaluate", config);
    manifest.add_input(&args.data)?;
    if let Classifier::External(path) = &args.classifier {
        manifest.add_input(path)?;
    }
    manifest.set_parameters(serde_json::json!({
        "representation": representation_name(args.representation),
        "classifier": classifier_name(&args.classifier),
        "split_fraction": config.split.train_fraction,
        "split_seed": config.split.seed,
        "seed": config.evaluation.seed,
        "ordinal": ordinal_order.is_some(),
        "n_predictions": metrics.n,
    }));
    manifest.add_output("metrics.json");
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn representation_name(r: Representation) -> &'static str {
    match r {
        Representation::Llm => "llm",
        Representation::Tfidf => "tfidf",
        Representation::Fused => "fused",
    }
}

fn classifier_name(c: &Classifier) -> String {
    match c {
        Classifier::NaiveMostFrequent => "naive-mf".into(),
        Classifier::NaiveUniform => "naive-uniform".into(),
        Classifier::NaiveBayes => "nb".into(),
        Classifier::External(path) => format!("external:{}", path.display()),
    }
}

fn build_representation(
    config: &PipelineConfig,
    train: &AugmentedTable,
    test: &AugmentedTable,
    representation: Representation,
) -> Result<(FeatureMatrix, FeatureMatrix), CliError> {
    let target = train.target_name().to_string();
    let exclude = [target.as_str()];
    match representation {
        Representation::Llm => Ok((
            table_to_matrix(train, &exclude)?,
            table_to_matrix(test, &exclude)?,
        )),
        Representation::Tfidf => {
            let (train_m, test_m) = tfidf_pair(config, train, test)?;
            Ok((train_m, test_m))
        }
        Representation::Fused => {
            let (train_t, test_t) = tfidf_pair(config, train, test)?;
            Ok((
                fuse_features(train, &train_t)?,
                fuse_features(test, &test_t)?,
            ))
        }
    }
}

fn tfidf_pair(
    config: &PipelineConfig,
    train: &AugmentedTable,
    test: &AugmentedTable,
) -> Result<(FeatureMatrix, FeatureMatrix), CliError> {
    let texts = |t: &AugmentedTable| -> Result<Vec<String>, CliError> {
        let col = t.column(&config.dataset.text_column).ok_or_else(|| {
            CliError::Data(format!(
                "text column `{}` not in table",
                config.dataset.text_column
            ))
        })?;
        Ok((0..t.n_rows())
            .map(|r| col.value_str(r).unwrap_or_default())
            .collect())
    };
    let train_texts = texts(train)?;
    let test_texts = texts(test)?;
    let settings = config.evaluation.tfidf.to_settings();
    let refs: Vec<&str> = train_texts.iter().map(|s| s.as_str()).collect();
    let model = fit_tfidf(&refs, &settings)?;
    let train_m = transform(&model, &refs, train.row_ids())?;
    let test_refs: Vec<&str> = test_texts.iter().map(|s| s.as_str()).collect();
    let test_m = transform(&model, &test_refs, test.row_ids())?;
    Ok((train_m, test_m))
}

/// Load a (row_id, predicted) CSV and join it with the table's target.
fn external_predictions(
    path: &PathBuf,
    table: &AugmentedTable,
) -> Result<Vec<Prediction>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let target_col = table.target_column().clone();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if record.len() < 2 {
            return Err(CliError::Data(format!(
                "{}: line {} needs row_id,predicted",
                path.display(),
                i + 2
            )));
        }
        let row_id = record[0].to_string();
        let row = table.row_index(&row_id).ok_or_else(|| {
            CliError::Data(format!("{}: unknown row id `{row_id}`", path.display()))
        })?;
        let truth = target_col.value_str(row).ok_or_else(|| {
            CliError::Data(format!("row `{row_id}` has no target value"))
        })?;
        out.push(Prediction {
            row_id,
            predicted: record[1].to_string(),
            truth,
        });
    }
    if out.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no predictions found",
            path.display()
        )));
    }
    Ok(out)
}
