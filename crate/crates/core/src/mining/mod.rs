//! Classification-rule and action-rule mining.
//!
//! Classification rules `antecedent => target item` come from a levelwise
//! Apriori search with downward-closure pruning on antecedent cover. Action
//! rules pair an undesired-state rule with a desired-state rule that share
//! stable conditions and flexible attributes, score the pair with uplift,
//! and are optionally reduced to the dominant subset.

mod action;
mod apriori;

pub use action::{
    compute_uplift, mine_action_rules, pair_action_rules, reduce_dominant, ActionRule, ActionTerm,
    RuleReport,
};
pub use apriori::mine_classification_rules;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::tabular::Item;

#[derive(Debug, thiserror::Error)]
pub enum MiningError {
    #[error("settings error: {0}")]
    Settings(String),
    #[error("table error: {0}")]
    Table(String),
}

/// A classification rule `antecedent => consequent` with its absolute
/// support, antecedent cover count and confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRule {
    /// Items sorted by (attribute, value); at most one item per attribute.
    pub antecedent: Vec<Item>,
    pub consequent: Item,
    /// Transactions containing antecedent and consequent.
    pub support: u64,
    /// Transactions containing the antecedent.
    pub cover: u64,
    /// support / cover.
    pub confidence: f64,
}

impl std::fmt::Display for ClassificationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let antecedent: Vec<String> = self.antecedent.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "{} => {} (support {}, confidence {:.1}%)",
            antecedent.join(" AND "),
            self.consequent,
            self.support,
            self.confidence * 100.0
        )
    }
}

/// Mining parameters for one action-rule experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningSettings {
    pub stable_attributes: BTreeSet<String>,
    pub flexible_attributes: BTreeSet<String>,
    #[serde(default)]
    pub min_stable_attributes: usize,
    #[serde(default = "default_min_flexible")]
    pub min_flexible_attributes: usize,
    pub min_undesired_support: u64,
    pub min_desired_support: u64,
    /// Ratios in (0, 1].
    pub min_undesired_confidence: f64,
    pub min_desired_confidence: f64,
    pub target: String,
    pub undesired_state: String,
    pub desired_state: String,
    /// Keep rules with negative uplift (discarded by default).
    #[serde(default)]
    pub keep_negative_uplift: bool,
    /// Compute the dominant subset (skippable per run).
    #[serde(default = "default_true")]
    pub reduce_dominant: bool,
}

fn default_min_flexible() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl MiningSettings {
    pub fn validate(&self) -> Result<(), MiningError> {
        if let Some(both) = self
            .stable_attributes
            .intersection(&self.flexible_attributes)
            .next()
        {
            return Err(MiningError::Settings(format!(
                "attribute `{both}` is both stable and flexible"
            )));
        }
        if self.stable_attributes.contains(&self.target)
            || self.flexible_attributes.contains(&self.target)
        {
            return Err(MiningError::Settings(format!(
                "target `{}` cannot be a stable or flexible attribute",
                self.target
            )));
        }
        if self.undesired_state == self.desired_state {
            return Err(MiningError::Settings(
                "undesired and desired states must differ".into(),
            ));
        }
        if self.min_flexible_attributes < 1 {
            return Err(MiningError::Settings(
                "min_flexible_attributes must be at least 1".into(),
            ));
        }
        for (name, c) in [
            ("min_undesired_confidence", self.min_undesired_confidence),
            ("min_desired_confidence", self.min_desired_confidence),
        ] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(MiningError::Settings(format!(
                    "{name} must be in (0, 1], got {c}"
                )));
            }
        }
        if self.min_undesired_support < 1 || self.min_desired_support < 1 {
            return Err(MiningError::Settings(
                "support thresholds must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Attributes eligible for rule antecedents.
    pub fn attribute_universe(&self) -> BTreeSet<String> {
        self.stable_attributes
            .union(&self.flexible_attributes)
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> MiningSettings {
        MiningSettings {
            stable_attributes: ["area".to_string()].into(),
            flexible_attributes: ["rigor".to_string(), "grammar".to_string()].into(),
            min_stable_attributes: 0,
            min_flexible_attributes: 1,
            min_undesired_support: 2,
            min_desired_support: 2,
            min_undesired_confidence: 0.7,
            min_desired_confidence: 0.7,
            target: "evaluation".into(),
            undesired_state: "bad".into(),
            desired_state: "good".into(),
            keep_negative_uplift: false,
            reduce_dominant: true,
        }
    }

    #[test]
    fn settings_validation() {
        assert!(settings().validate().is_ok());

        let mut s = settings();
        s.stable_attributes.insert("rigor".into());
        assert!(s.validate().is_err());

        let mut s = settings();
        s.flexible_attributes.insert("evaluation".into());
        assert!(s.validate().is_err());

        let mut s = settings();
        s.desired_state = "bad".into();
        assert!(s.validate().is_err());

        let mut s = settings();
        s.min_undesired_confidence = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn settings_parse_config_field_names() {
        let json = r#"{
            "stable_attributes": ["area"],
            "flexible_attributes": ["rigor"],
            "min_stable_attributes": 1,
            "min_flexible_attributes": 1,
            "min_undesired_support": 35,
            "min_desired_support": 35,
            "min_undesired_confidence": 0.7,
            "min_desired_confidence": 0.7,
            "target": "evaluation",
            "undesired_state": "bad",
            "desired_state": "good"
        }"#;
        let s: MiningSettings = serde_json::from_str(json).unwrap();
        assert_eq!(s.min_stable_attributes, 1);
        assert!(s.reduce_dominant);
        assert!(!s.keep_negative_uplift);
    }
}
