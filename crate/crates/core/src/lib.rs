//! Interpretable feature pipelines for text datasets.
//!
//! The crate turns raw text rows into small sets of categorical features via
//! LLM prompting, statistically validates those features against a target
//! column, and mines action rules that recommend attribute changes to flip an
//! undesired outcome into a desired one.
//!
//! Modules follow the pipeline order:
//!
//! - [`tabular`] — canonical table model, CSV I/O, encoding, splitting
//! - [`discovery`] — LLM feature-discovery prompts and spec parsing
//! - [`generation`] — per-row value-extraction prompts, LLM backends, batch files
//! - [`stats`] — chi-squared / Cramér's V / bootstrap / SMOG / correlation
//! - [`mining`] — classification rules, action rules, uplift, dominance
//! - [`eval`] — TF-IDF baseline, trivial classifiers, metric suite

pub mod discovery;
pub mod eval;
pub mod generation;
pub mod mining;
pub mod stats;
pub mod tabular;

pub(crate) mod util;
