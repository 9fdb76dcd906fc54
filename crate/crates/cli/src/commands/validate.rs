//! `validate`: per-feature chi-squared + bootstrap + Cramér's V report.

use std::io::Write;
use std::path::PathBuf;

use featmine::stats::{bootstrap_test, FeatureTestResult, StatsError};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

use super::{ensure_out_dir, load_table};

pub struct ValidateArgs {
    pub data: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, serde::Serialize)]
struct ValidationRow {
    #[serde(flatten)]
    result: FeatureTestResult,
    robust: bool,
}

#[derive(Debug, serde::Serialize)]
struct ValidationReport {
    alpha: f64,
    bootstrap_reps: u32,
    seed: u64,
    robust_fraction: f64,
    features: Vec<ValidationRow>,
    /// Features that could not be tested (fewer than two observed
    /// categories).
    skipped: Vec<(String, String)>,
}

pub fn cmd_validate(config: &PipelineConfig, args: &ValidateArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out_dir)?;
    let table = load_table(config, &args.data)?;
    let target = table.target_name().to_string();
    let v = &config.validation;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for col in table.columns() {
        if col.name == target || !col.kind.is_encoded() {
            continue;
        }
        match bootstrap_test(
            &table,
            &col.name,
            &target,
            v.bootstrap_reps,
            v.alpha,
            v.seed,
        ) {
            Ok(result) => rows.push(ValidationRow {
                robust: result.bootstrap_significant_fraction >= v.robust_fraction,
                result,
            }),
            Err(StatsError::Degenerate(msg)) => {
                eprintln!("warning: skipping `{}`: {msg}", col.name);
                skipped.push((col.name.clone(), msg));
            }
            Err(e) => return Err(e.into()),
        }
    }
    // strongest associations first
    rows.sort_by(|a, b| {
        b.result
            .cramers_v
            .partial_cmp(&a.result.cramers_v)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.result.feature.cmp(&b.result.feature))
    });

    let mut csv = String::from(
        "feature,chi2,dof,p_value,stars,cramers_v,bootstrap_fraction,bootstrap_degenerate,robust\n",
    );
    for row in &rows {
        let r = &row.result;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.feature,
            r.chi2,
            r.dof,
            r.p_value,
            r.stars,
            r.cramers_v,
            r.bootstrap_significant_fraction,
            r.bootstrap_degenerate,
            row.robust
        ));
    }
    std::fs::write(args.out_dir.join("validation.csv"), csv)?;

    let report = ValidationReport {
        alpha: v.alpha,
        bootstrap_reps: v.bootstrap_reps,
        seed: v.seed,
        robust_fraction: v.robust_fraction,
        features: rows,
        skipped,
    };
    super::write_json(&args.out_dir, "validation.json", &report)?;

    let mut out = std::io::stdout();
    for row in &report.features {
        let r = &row.result;
        writeln!(
            out,
            "{:<24} {:>4} V={:.3} p={:.4e} bootstrap={:.3}",
            r.feature, r.stars, r.cramers_v, r.p_value, r.bootstrap_significant_fraction
        )
        .ok();
    }

    let mut manifest = RunManifest::new("validate", config);
    manifest.add_input(&args.data)?;
    manifest.set_parameters(serde_json::json!({
        "alpha": v.alpha,
        "bootstrap_reps": v.bootstrap_reps,
        "seed": v.seed,
        "robust_fraction": v.robust_fraction,
        "features_tested": report.features.len(),
        "features_skipped": report.skipped.len(),
    }));
    manifest.add_output("validation.csv");
    manifest.add_output("validation.json");
    manifest.write(&args.out_dir)?;
    Ok(())
}
