//! `mine`: run one configured action-rule experiment and report the rules.

use std::path::PathBuf;

use featmine::mining::{mine_action_rules, ActionRule, RuleReport};
use featmine::tabular::bin_target;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

use super::{ensure_out_dir, load_table};

pub struct MineArgs {
    pub data: PathBuf,
    pub out_dir: PathBuf,
    pub experiment: String,
    pub no_dominant: bool,
}

pub fn cmd_mine(config: &PipelineConfig, args: &MineArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out_dir)?;
    let mut table = load_table(config, &args.data)?;
    let experiment = config.experiment(&args.experiment)?;

    if let Some(binning) = experiment.binning()? {
        table = bin_target(&table, &binning)?;
    }
    let mut settings = experiment.settings.clone();
    if args.no_dominant {
        settings.reduce_dominant = false;
    }

    let report = mine_action_rules(&table, &settings)?;
    super::write_json(&args.out_dir, "rules.json", &report)?;
    std::fs::write(args.out_dir.join("rules.txt"), render_report(&report))?;

    let mut manifest = RunManifest::new("mine", config);
    manifest.add_input(&args.data)?;
    manifest.set_parameters(serde_json::json!({
        "experiment": args.experiment,
        "dataset_size": report.dataset_size,
        "discovered": report.discovered.len(),
        "dominant": report.dominant.as_ref().map(|d| d.len()),
    }));
    manifest.add_output("rules.json");
    manifest.add_output("rules.txt");
    manifest.write(&args.out_dir)?;
    println!(
        "mine[{}]: {} discovered, {} dominant ({} rows)",
        args.experiment,
        report.discovered.len(),
        report
            .dominant
            .as_ref()
            .map(|d| d.len().to_string())
            .unwrap_or_else(|| "-".into()),
        report.dataset_size
    );
    Ok(())
}

/// Human-readable rule table: one row per rule with stable conditions,
/// actions, target transition and uplift percent.
fn render_report(report: &RuleReport) -> String {
    let mut out = String::new();
    let s = &report.settings;
    out.push_str(&format!(
        "Action rules: {} = ({} -> {})\n",
        s.target, s.undesired_state, s.desired_state
    ));
    out.push_str(&format!(
        "Rows: {}  min stable: {}  min flexible: {}  min support (u/d): {}/{}  min confidence (u/d): {:.0}%/{:.0}%\n\n",
        report.dataset_size,
        s.min_stable_attributes,
        s.min_flexible_attributes,
        s.min_undesired_support,
        s.min_desired_support,
        s.min_undesired_confidence * 100.0,
        s.min_desired_confidence * 100.0,
    ));

    out.push_str(&format!(
        "Discovered action rules: {}\n",
        report.discovered.len()
    ));
    out.push_str(&render_rules(&report.discovered));
    match &report.dominant {
        Some(dominant) => {
            out.push_str(&format!("\nDominant action rules: {}\n", dominant.len()));
            out.push_str(&render_rules(dominant));
        }
        None => out.push_str("\nDominant action rules: - (reduction disabled)\n"),
    }
    out
}

fn render_rules(rules: &[ActionRule]) -> String {
    let mut out = String::new();
    for (i, rule) in rules.iter().enumerate() {
        let stable: Vec<String> = rule.stable_conditions.iter().map(|c| c.to_string()).collect();
        let actions: Vec<String> = rule.actions.iter().map(|a| a.to_string()).collect();
        out.push_str(&format!(
            "r{:<3} | {} | {} | {} = ({} -> {}) | uplift {:.2}%\n",
            i + 1,
            if stable.is_empty() {
                "-".to_string()
            } else {
                stable.join(" AND ")
            },
            if actions.is_empty() {
                "-".to_string()
            } else {
                actions.join(" AND ")
            },
            rule.target,
            rule.target_transition.0,
            rule.target_transition.1,
            rule.uplift * 100.0
        ));
    }
    out
}
