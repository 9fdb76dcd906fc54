//! Subcommand implementations.

pub mod discover;
pub mod evaluate;
pub mod generate;
pub mod mine;
pub mod validate;

pub use discover::cmd_discover;
pub use evaluate::{cmd_evaluate, Classifier, Representation};
pub use generate::{cmd_generate, GenerateMode, Workflow};
pub use mine::cmd_mine;
pub use validate::cmd_validate;

use std::path::{Path, PathBuf};

use featmine::generation::{HttpBackend, HttpBackendConfig, LlmBackend, MockBackend};
use featmine::tabular::{load_csv, load_csv_with_sidecar, AugmentedTable};

use crate::config::PipelineConfig;
use crate::error::CliError;

/// Load an input CSV: prefer the schema sidecar written by our own export,
/// fall back to the schema derived from the config.
pub(crate) fn load_table(
    config: &PipelineConfig,
    path: &Path,
) -> Result<AugmentedTable, CliError> {
    let sidecar = path.with_extension("schema.json");
    let table = if sidecar.exists() {
        load_csv_with_sidecar(path)?
    } else {
        load_csv(path, &config.input_schema())?
    };
    Ok(table)
}

/// Construct the backend for `mode` (`mock` or `live`like).
pub(crate) fn make_backend(
    config: &PipelineConfig,
    mode: &str,
    fixture_override: Option<&PathBuf>,
) -> Result<Box<dyn LlmBackend>, CliError> {
    match mode {
        "mock" => {
            let path = fixture_override
                .cloned()
                .or_else(|| config.llm.mock_fixtures.clone())
                .ok_or_else(|| {
                    CliError::Usage(
                        "mock mode needs a fixture file (config llm.mock_fixtures or --fixture)"
                            .into(),
                    )
                })?;
            Ok(Box::new(MockBackend::from_file(&path).map_err(|e| {
                CliError::Usage(format!("fixture {}: {e}", path.display()))
            })?))
        }
        "live" => {
            let backend = HttpBackend::from_config(&HttpBackendConfig {
                endpoint: config.llm.endpoint.clone(),
                api_key_env: config.llm.api_key_env.clone(),
                timeout: std::time::Duration::from_secs(120),
            })?;
            Ok(Box::new(backend))
        }
        other => Err(CliError::Usage(format!("unknown backend mode `{other}`"))),
    }
}

pub(crate) fn ensure_out_dir(out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))
}

pub(crate) fn write_json(
    out_dir: &Path,
    name: &str,
    value: &impl serde::Serialize,
) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialization: {e}")))?;
    std::fs::write(out_dir.join(name), json + "\n")?;
    Ok(())
}
