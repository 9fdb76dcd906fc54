//! Command implementations behind the `featmine` binary, exposed as a
//! library so integration tests can drive the pipeline in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use commands::{
    cmd_discover, cmd_evaluate, cmd_generate, cmd_mine, cmd_validate, Classifier, GenerateMode,
    Representation, Workflow,
};
pub use config::PipelineConfig;
pub use error::CliError;
