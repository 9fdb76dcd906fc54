//! `discover`: build the feature-discovery prompt, query the backend, and
//! write the validated feature specs.

use std::path::PathBuf;

use featmine::discovery::{
    build_discovery_prompt_with_template, cap_categories, parse_feature_specs, specs_to_json,
    DatasetMeta, DEFAULT_PROMPT_TEMPLATE,
};
use featmine::generation::{
    submit, LlmRequest, Message, ResponseStatus, SubmitOptions,
};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

use super::{ensure_out_dir, load_table, make_backend};

pub struct DiscoverArgs {
    pub data: PathBuf,
    pub out_dir: PathBuf,
    pub mode: Option<String>,
    pub fixture: Option<PathBuf>,
    pub sample_size: Option<usize>,
    pub seed: Option<u64>,
}

pub fn cmd_discover(config: &PipelineConfig, args: &DiscoverArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out_dir)?;
    let table = load_table(config, &args.data)?;

    let text_col = table
        .column(&config.dataset.text_column)
        .ok_or_else(|| {
            CliError::Data(format!(
                "text column `{}` not in table",
                config.dataset.text_column
            ))
        })?;
    let target_col = table.target_column();
    let example_rows: Vec<(String, String)> = (0..table.n_rows())
        .filter_map(|r| Some((text_col.value_str(r)?, target_col.value_str(r)?)))
        .collect();

    let meta = DatasetMeta {
        name: config.dataset.name.clone(),
        description: config.dataset.description.clone(),
        text_column: config.dataset.text_column.clone(),
        target_column: config.dataset.target_column.clone(),
        target_definition: config.dataset.target_definition.clone(),
        example_rows,
    };
    let sample_size = args.sample_size.unwrap_or(config.discovery.sample_size);
    let seed = args.seed.unwrap_or(config.discovery.seed);
    let template = match &config.discovery.template {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("template {}: {e}", path.display())))?,
        None => DEFAULT_PROMPT_TEMPLATE.to_string(),
    };
    let prompt = build_discovery_prompt_with_template(&meta, sample_size, seed, &template)?;

    let mode = args.mode.clone().unwrap_or_else(|| config.llm.mode.clone());
    let backend = make_backend(config, &mode, args.fixture.as_ref())?;
    let request = LlmRequest {
        custom_id: format!("discovery|{}", config.dataset.name),
        model: config.llm.model.clone(),
        temperature: config.llm.temperature,
        top_p: config.llm.top_p,
        deterministic_sampling: true,
        messages: vec![
            Message {
                role: "system".into(),
                content: prompt.system_message.clone(),
            },
            Message {
                role: "user".into(),
                content: prompt.body.clone(),
            },
        ],
    };
    let responses = submit(
        &[request],
        backend.as_ref(),
        &SubmitOptions {
            parallelism: 1,
            ..SubmitOptions::default()
        },
    )?;
    let response = &responses[0];
    if response.status != ResponseStatus::Ok {
        return Err(CliError::Backend(format!(
            "discovery request failed ({:?}): {}",
            response.status,
            response.error.clone().unwrap_or_default()
        )));
    }

    let specs = parse_feature_specs(&response.content)?;
    let capped: Vec<_> = specs
        .iter()
        .map(|s| cap_categories(s, config.discovery.max_categories))
        .collect();
    if capped.len() < 20 {
        eprintln!(
            "warning: discovery produced {} features (fewer than the 20 the prompt requests)",
            capped.len()
        );
    }

    std::fs::write(args.out_dir.join("features.json"), specs_to_json(&capped))?;

    let mut manifest = RunManifest::new("discover", config);
    manifest.add_input(&args.data)?;
    manifest.set_parameters(serde_json::json!({
        "sample_size": sample_size,
        "seed": seed,
        "mode": mode,
        "model": config.llm.model,
        "temperature": config.llm.temperature,
        "top_p": config.llm.top_p,
        "feature_count": capped.len(),
        "max_categories": config.discovery.max_categories,
    }));
    manifest.add_output("features.json");
    manifest.write(&args.out_dir)?;
    println!(
        "discover: {} features -> {}",
        capped.len(),
        args.out_dir.join("features.json").display()
    );
    Ok(())
}
