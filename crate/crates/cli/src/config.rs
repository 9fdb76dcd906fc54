//! Pipeline configuration: a single TOML file with one section per stage.
//! Secrets never live in the file; the llm section names the environment
//! variable holding the API key. Command-line flags override config values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use featmine::mining::MiningSettings;
use featmine::tabular::TargetBinning;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub llm: LlmSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub discovery: DiscoverySection,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub validation: ValidationSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub mining: MiningSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSection {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub text_column: String,
    pub target_column: String,
    #[serde(default)]
    pub target_definition: String,
    /// Column carrying stable row ids; generated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
    /// Explicit category spaces for input columns (values outside them are
    /// flagged invalid at load).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub categories: BTreeMap<String, Vec<String>>,
    /// Separator inside multilabel cells.
    #[serde(default = "default_separator")]
    pub multilabel_separator: char,
}

fn default_separator() -> char {
    ';'
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendMode {
    Mock,
    Live,
    BatchEmit,
    BatchIngest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmSection {
    /// Default backend mode; the --mode flag overrides it.
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    /// Mock fixture file (custom id -> content).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_fixtures: Option<PathBuf>,
    /// Maximum requests per emitted batch file.
    #[serde(default = "default_batch_cap")]
    pub batch_file_cap: usize,
}

fn default_mode() -> String {
    "mock".into()
}
fn default_model() -> String {
    "gpt-4o-mini-2024-07-18".into()
}
fn default_top_p() -> f64 {
    0.9
}
fn default_parallelism() -> usize {
    4
}
fn default_api_key_env() -> String {
    "LLM_API_KEY".into()
}
fn default_batch_cap() -> usize {
    featmine::generation::DEFAULT_BATCH_FILE_CAP
}

impl Default for LlmSection {
    fn default() -> Self {
        LlmSection {
            mode: default_mode(),
            endpoint: String::new(),
            model: default_model(),
            temperature: 0.0,
            top_p: default_top_p(),
            parallelism: default_parallelism(),
            api_key_env: default_api_key_env(),
            mock_fixtures: None,
            batch_file_cap: default_batch_cap(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSection {
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    0.8
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_fraction: default_fraction(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscoverySection {
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Prompt template override; the built-in template is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<PathBuf>,
    #[serde(default = "default_max_categories")]
    pub max_categories: usize,
}

fn default_sample_size() -> usize {
    40
}
fn default_max_categories() -> usize {
    featmine::discovery::DEFAULT_MAX_CATEGORIES
}

impl Default for DiscoverySection {
    fn default() -> Self {
        DiscoverySection {
            sample_size: default_sample_size(),
            seed: 0,
            template: None,
            max_categories: default_max_categories(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationSection {
    /// `user` (one prompt per row and feature) or `auto` (one prompt per row).
    #[serde(default = "default_workflow")]
    pub workflow: String,
    /// `strict` or `coerce`.
    #[serde(default = "default_policy")]
    pub policy: String,
}

fn default_workflow() -> String {
    "auto".into()
}
fn default_policy() -> String {
    "strict".into()
}

impl Default for GenerationSection {
    fn default() -> Self {
        GenerationSection {
            workflow: default_workflow(),
            policy: default_policy(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_reps")]
    pub bootstrap_reps: u32,
    #[serde(default)]
    pub seed: u64,
    /// `pearson` or `spearman` for the correlation helper.
    #[serde(default = "default_correlation")]
    pub correlation: String,
    /// Features with a bootstrap significant fraction at or above this are
    /// flagged robust.
    #[serde(default = "default_robust")]
    pub robust_fraction: f64,
}

fn default_alpha() -> f64 {
    0.05
}
fn default_reps() -> u32 {
    2500
}
fn default_correlation() -> String {
    "pearson".into()
}
fn default_robust() -> f64 {
    0.95
}

impl Default for ValidationSection {
    fn default() -> Self {
        ValidationSection {
            alpha: default_alpha(),
            bootstrap_reps: default_reps(),
            seed: 0,
            correlation: default_correlation(),
            robust_fraction: default_robust(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationSection {
    #[serde(default)]
    pub seed: u64,
    /// Use MAE over ordinal codes (requires an ordinal target).
    #[serde(default)]
    pub ordinal: bool,
    #[serde(default)]
    pub tfidf: TfidfSection,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            seed: 0,
            ordinal: false,
            tfidf: TfidfSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfSection {
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default = "default_pattern")]
    pub token_pattern: String,
    #[serde(default = "default_min_df")]
    pub min_document_frequency: usize,
}

fn default_true() -> bool {
    true
}
fn default_pattern() -> String {
    "[a-zA-Z0-9]+".into()
}
fn default_min_df() -> usize {
    1
}

impl Default for TfidfSection {
    fn default() -> Self {
        TfidfSection {
            lowercase: true,
            token_pattern: default_pattern(),
            min_document_frequency: default_min_df(),
        }
    }
}

impl TfidfSection {
    pub fn to_settings(&self) -> featmine::eval::TfidfSettings {
        featmine::eval::TfidfSettings {
            lowercase: self.lowercase,
            token_pattern: self.token_pattern.clone(),
            min_document_frequency: self.min_document_frequency,
            l2_normalize: true,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MiningSection {
    #[serde(default)]
    pub experiments: Vec<ExperimentSection>,
}

/// One mining experiment: settings plus an optional target binning applied
/// before mining.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub id: String,
    #[serde(flatten)]
    pub settings: MiningSettings,
    #[serde(default)]
    pub bins: Vec<BinDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinDef {
    pub label: String,
    pub categories: Vec<String>,
}

impl ExperimentSection {
    pub fn binning(&self) -> Result<Option<TargetBinning>, CliError> {
        if self.bins.is_empty() {
            return Ok(None);
        }
        let bins = self
            .bins
            .iter()
            .map(|b| (b.label.clone(), b.categories.clone()))
            .collect();
        TargetBinning::new(bins)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("experiment `{}`: {e}", self.id)))
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(config)
    }

    /// Schema for loading the raw input CSV.
    pub fn input_schema(&self) -> featmine::tabular::TableSchema {
        let mut schema = featmine::tabular::TableSchema::new(&self.dataset.target_column);
        schema.row_id_column = self.dataset.id_column.clone();
        schema.hints.insert(
            self.dataset.text_column.clone(),
            featmine::tabular::ColumnHint {
                kind: featmine::tabular::ColumnKind::Text,
                categories: None,
            },
        );
        for (column, categories) in &self.dataset.categories {
            schema.hints.insert(
                column.clone(),
                featmine::tabular::ColumnHint {
                    kind: featmine::tabular::ColumnKind::Categorical,
                    categories: Some(categories.clone()),
                },
            );
        }
        schema
    }

    pub fn experiment(&self, id: &str) -> Result<&ExperimentSection, CliError> {
        self.mining
            .experiments
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| {
                let known: Vec<&str> =
                    self.mining.experiments.iter().map(|e| e.id.as_str()).collect();
                CliError::Usage(format!(
                    "experiment `{id}` not found in config (known: {known:?})"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"
[dataset]
name = "sample"
description = "five-row sample"
text_column = "text"
target_column = "target"
target_definition = "binary outcome"

[llm]
mode = "mock"
model = "test-model"
mock_fixtures = "fixtures.json"

[split]
train_fraction = 0.8
seed = 42

[validation]
alpha = 0.05
bootstrap_reps = 100
seed = 7

[[mining.experiments]]
id = "exp1"
stable_attributes = ["area"]
flexible_attributes = ["rigor"]
min_stable_attributes = 0
min_flexible_attributes = 1
min_undesired_support = 60
min_desired_support = 60
min_undesired_confidence = 0.7
min_desired_confidence = 0.7
target = "evaluation"
undesired_state = "bad"
desired_state = "good"

[[mining.experiments.bins]]
label = "good"
categories = ["1", "2"]

[[mining.experiments.bins]]
label = "bad"
categories = ["4", "5"]
"#;
        let config: PipelineConfig = toml::from_str(text).unwrap();
        assert_eq!(config.dataset.name, "sample");
        assert_eq!(config.llm.batch_file_cap, 600);
        assert_eq!(config.validation.bootstrap_reps, 100);
        let exp = config.experiment("exp1").unwrap();
        assert_eq!(exp.settings.min_undesired_support, 60);
        let binning = exp.binning().unwrap().unwrap();
        assert_eq!(binning.bin_of("4"), Some("bad"));
        assert!(config.experiment("nope").is_err());
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let text = r#"
[dataset]
name = "d"
text_column = "text"
target_column = "y"
"#;
        let config: PipelineConfig = toml::from_str(text).unwrap();
        assert_eq!(config.llm.mode, "mock");
        assert_eq!(config.llm.temperature, 0.0);
        assert_eq!(config.llm.top_p, 0.9);
        assert_eq!(config.discovery.sample_size, 40);
        assert_eq!(config.validation.bootstrap_reps, 2500);
        assert_eq!(config.split.train_fraction, 0.8);
    }
}
