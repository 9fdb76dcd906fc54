//! `generate`: instantiate per-row extraction prompts and produce the
//! augmented table (or batch files) per backend mode.

use std::path::PathBuf;

use featmine::discovery::{load_specs, FeatureSpec};
use featmine::generation::{
    build_multi_feature_prompt, build_single_feature_prompt, emit_batch_files,
    ingest_batch_results, submit, validate_and_attach, LlmRequest, LlmResponse, Policy,
    RequestSettings, SubmitOptions, MULTI_PROMPT_TAG,
};
use featmine::tabular::{write_csv, AugmentedTable};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

use super::{ensure_out_dir, load_table, make_backend};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    /// One prompt per (row, feature), plain-JSON single answers.
    User,
    /// One prompt per row extracting all features at once.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerateMode {
    Mock,
    Live,
    BatchEmit,
    BatchIngest,
}

pub struct GenerateArgs {
    pub data: PathBuf,
    pub features: PathBuf,
    pub out_dir: PathBuf,
    pub workflow: Workflow,
    pub mode: GenerateMode,
    pub policy: Option<String>,
    pub fixture: Option<PathBuf>,
    /// Result JSONL files for batch-ingest mode.
    pub results: Vec<PathBuf>,
}

pub fn cmd_generate(config: &PipelineConfig, args: &GenerateArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out_dir)?;
    let table = load_table(config, &args.data)?;
    let specs = load_specs(&args.features)?;

    let policy = match args
        .policy
        .clone()
        .unwrap_or_else(|| config.generation.policy.clone())
        .as_str()
    {
        "strict" => Policy::Strict,
        "coerce" => Policy::Coerce,
        other => return Err(CliError::Usage(format!("unknown policy `{other}`"))),
    };

    let requests = build_requests(config, &table, &specs, args.workflow)?;
    let mut manifest = RunManifest::new("generate", config);
    manifest.add_input(&args.data)?;
    manifest.add_input(&args.features)?;

    let responses: Vec<LlmResponse> = match args.mode {
        GenerateMode::BatchEmit => {
            let files = emit_batch_files(
                &requests,
                &args.out_dir,
                "batch",
                config.llm.batch_file_cap,
            )?;
            for (path, count) in &files {
                println!("batch-emit: {} ({count} requests)", path.display());
            }
            manifest.set_parameters(serde_json::json!({
                "mode": "batch-emit",
                "workflow": workflow_name(args.workflow),
                "requests": requests.len(),
                "batch_file_cap": config.llm.batch_file_cap,
                "files": files.len(),
                "model": config.llm.model,
                "temperature": config.llm.temperature,
                "top_p": config.llm.top_p,
            }));
            for (path, _) in &files {
                if let Some(name) = path.file_name() {
                    manifest.add_output(&name.to_string_lossy());
                }
            }
            manifest.write(&args.out_dir)?;
            return Ok(());
        }
        GenerateMode::BatchIngest => {
            if args.results.is_empty() {
                return Err(CliError::Usage(
                    "batch-ingest needs at least one --results file".into(),
                ));
            }
            let mut responses = Vec::new();
            for path in &args.results {
                manifest.add_input(path)?;
                let ingest = ingest_batch_results(path)?;
                for (line, msg) in &ingest.malformed {
                    eprintln!("warning: {}:{line}: {msg}", path.display());
                }
                responses.extend(ingest.responses);
            }
            responses
        }
        GenerateMode::Mock | GenerateMode::Live => {
            let mode = if args.mode == GenerateMode::Mock {
                "mock"
            } else {
                "live"
            };
            let backend = make_backend(config, mode, args.fixture.as_ref())?;
            submit(
                &requests,
                backend.as_ref(),
                &SubmitOptions {
                    parallelism: config.llm.parallelism,
                    ..SubmitOptions::default()
                },
            )?
        }
    };

    let (augmented, report) = validate_and_attach(&responses, &specs, &table, policy)?;
    write_csv(&augmented, args.out_dir.join("augmented.csv"))?;
    super::write_json(&args.out_dir, "generation_report.json", &report)?;

    manifest.set_parameters(serde_json::json!({
        "mode": mode_name(args.mode),
        "workflow": workflow_name(args.workflow),
        "policy": if policy == Policy::Strict { "strict" } else { "coerce" },
        "requests": requests.len(),
        "rows_total": report.rows_total,
        "rows_valid": report.rows_valid,
        "rows_invalid": report.rows_invalid,
        "model": config.llm.model,
        "temperature": config.llm.temperature,
        "top_p": config.llm.top_p,
        "deterministic_sampling": args.workflow == Workflow::User,
        "parallelism": config.llm.parallelism,
    }));
    manifest.add_output("augmented.csv");
    manifest.add_output("augmented.schema.json");
    manifest.add_output("generation_report.json");
    manifest.write(&args.out_dir)?;
    println!(
        "generate: {} rows valid, {} invalid -> {}",
        report.rows_valid,
        report.rows_invalid,
        args.out_dir.join("augmented.csv").display()
    );
    Ok(())
}

fn workflow_name(w: Workflow) -> &'static str {
    match w {
        Workflow::User => "user",
        Workflow::Auto => "auto",
    }
}

fn mode_name(m: GenerateMode) -> &'static str {
    match m {
        GenerateMode::Mock => "mock",
        GenerateMode::Live => "live",
        GenerateMode::BatchEmit => "batch-emit",
        GenerateMode::BatchIngest => "batch-ingest",
    }
}

fn build_requests(
    config: &PipelineConfig,
    table: &AugmentedTable,
    specs: &[FeatureSpec],
    workflow: Workflow,
) -> Result<Vec<LlmRequest>, CliError> {
    let text_col = table.column(&config.dataset.text_column).ok_or_else(|| {
        CliError::Data(format!(
            "text column `{}` not in table",
            config.dataset.text_column
        ))
    })?;
    let settings = RequestSettings {
        model: config.llm.model.clone(),
        temperature: config.llm.temperature,
        top_p: config.llm.top_p,
        // the per-feature workflow requests greedy decoding
        deterministic_sampling: workflow == Workflow::User,
    };

    let mut requests = Vec::new();
    for row in 0..table.n_rows() {
        let Some(text) = text_col.value_str(row) else {
            continue; // no text, nothing to extract; cells stay missing
        };
        let row_id = &table.row_ids()[row];
        match workflow {
            Workflow::User => {
                for spec in specs {
                    let prompt = build_single_feature_prompt(spec, &text, row_id)?;
                    requests.push(LlmRequest::from_prompt(
                        &prompt,
                        &spec.column_name(),
                        &settings,
                    ));
                }
            }
            Workflow::Auto => {
                let prompt = build_multi_feature_prompt(specs, &text, row_id)?;
                requests.push(LlmRequest::from_prompt(&prompt, MULTI_PROMPT_TAG, &settings));
            }
        }
    }
    Ok(requests)
}
