//! Pipeline CLI: discover -> generate -> validate -> mine -> evaluate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use featmine_cli::commands::discover::DiscoverArgs;
use featmine_cli::commands::evaluate::EvaluateArgs;
use featmine_cli::commands::generate::GenerateArgs;
use featmine_cli::commands::mine::MineArgs;
use featmine_cli::commands::validate::ValidateArgs;
use featmine_cli::{
    cmd_discover, cmd_evaluate, cmd_generate, cmd_mine, cmd_validate, Classifier, CliError,
    GenerateMode, PipelineConfig, Representation, Workflow,
};

#[derive(Parser)]
#[command(
    name = "featmine",
    about = "LLM feature generation, statistical validation and action-rule mining over text datasets",
    version
)]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, default_value = "featmine.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propose feature specs from dataset metadata and sample rows.
    Discover {
        /// Input data CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Backend mode override (mock | live).
        #[arg(long)]
        mode: Option<String>,
        /// Mock fixture file override.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Example rows placed in the prompt.
        #[arg(long)]
        sample_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate feature values per row and attach them to the table.
    Generate {
        #[arg(long)]
        data: PathBuf,
        /// Feature spec JSON (discover output or hand-written).
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// user = one prompt per row and feature; auto = one prompt per row.
        #[arg(long, default_value = "auto")]
        workflow: String,
        /// mock | live | batch-emit | batch-ingest.
        #[arg(long, default_value = "mock")]
        mode: String,
        /// strict | coerce (defaults to the config).
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Result JSONL files for batch-ingest.
        #[arg(long)]
        results: Vec<PathBuf>,
    },
    /// Chi-squared + bootstrap + Cramér's V validation of every feature.
    Validate {
        /// Augmented CSV (generate output).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Mine action rules for one configured experiment.
    Mine {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Experiment id from the config's mining section.
        #[arg(long)]
        experiment: String,
        /// Skip dominance reduction for this run.
        #[arg(long)]
        no_dominant: bool,
    },
    /// Train a baseline classifier (or score external predictions).
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// llm | tfidf | fused.
        #[arg(long, default_value = "llm")]
        representation: String,
        /// naive-mf | naive-uniform | nb | external:<preds.csv>.
        #[arg(long, default_value = "nb")]
        classifier: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = PipelineConfig::load(&cli.config)?;
    match cli.command {
        Command::Discover {
            data,
            out_dir,
            mode,
            fixture,
            sample_size,
            seed,
        } => cmd_discover(
            &config,
            &DiscoverArgs {
                data,
                out_dir,
                mode,
                fixture,
                sample_size,
                seed,
            },
        ),
        Command::Generate {
            data,
            features,
            out_dir,
            workflow,
            mode,
            policy,
            fixture,
            results,
        } => {
            let workflow = match workflow.as_str() {
                "user" => Workflow::User,
                "auto" => Workflow::Auto,
                other => return Err(CliError::Usage(format!("unknown workflow `{other}`"))),
            };
            let mode = match mode.as_str() {
                "mock" => GenerateMode::Mock,
                "live" => GenerateMode::Live,
                "batch-emit" => GenerateMode::BatchEmit,
                "batch-ingest" => GenerateMode::BatchIngest,
                other => return Err(CliError::Usage(format!("unknown mode `{other}`"))),
            };
            cmd_generate(
                &config,
                &GenerateArgs {
                    data,
                    features,
                    out_dir,
                    workflow,
                    mode,
                    policy,
                    fixture,
                    results,
                },
            )
        }
        Command::Validate { data, out_dir } => {
            cmd_validate(&config, &ValidateArgs { data, out_dir })
        }
        Command::Mine {
            data,
            out_dir,
            experiment,
            no_dominant,
        } => cmd_mine(
            &config,
            &MineArgs {
                data,
                out_dir,
                experiment,
                no_dominant,
            },
        ),
        Command::Evaluate {
            data,
            out_dir,
            representation,
            classifier,
        } => {
            let representation = match representation.as_str() {
                "llm" => Representation::Llm,
                "tfidf" => Representation::Tfidf,
                "fused" => Representation::Fused,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown representation `{other}`"
                    )))
                }
            };
            let classifier = match classifier.as_str() {
                "naive-mf" => Classifier::NaiveMostFrequent,
                "naive-uniform" => Classifier::NaiveUniform,
                "nb" => Classifier::NaiveBayes,
                other => match other.strip_prefix("external:") {
                    Some(path) => Classifier::External(PathBuf::from(path)),
                    None => {
                        return Err(CliError::Usage(format!("unknown classifier `{other}`")))
                    }
                },
            };
            cmd_evaluate(
                &config,
                &EvaluateArgs {
                    data,
                    out_dir,
                    representation,
                    classifier,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
