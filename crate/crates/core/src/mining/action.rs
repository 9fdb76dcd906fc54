//! Action-rule construction, uplift scoring and dominance reduction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tabular::{to_transactions, AugmentedTable, Item};

use super::{mine_classification_rules, ClassificationRule, MiningError, MiningSettings};

/// One flexible-attribute term. `from == to` is an unchanged-context term:
/// it stays in the rule display and in dominance comparisons but does not
/// count toward the minimum number of recommended changes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionTerm {
    pub attribute: String,
    pub from: String,
    pub to: String,
}

impl ActionTerm {
    pub fn is_change(&self) -> bool {
        self.from != self.to
    }
}

impl std::fmt::Display for ActionTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_change() {
            write!(f, "{} = ({} -> {})", self.attribute, self.from, self.to)
        } else {
            write!(f, "{} = {}", self.attribute, self.from)
        }
    }
}

/// A recommended intervention: keep the stable conditions, apply the changed
/// flexible terms, and the target is expected to flip from the undesired to
/// the desired state in an `uplift` fraction of the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRule {
    /// (attribute, value) pairs shared by both member rules, sorted.
    pub stable_conditions: Vec<Item>,
    /// Flexible terms sorted by attribute; includes unchanged context.
    pub actions: Vec<ActionTerm>,
    pub target: String,
    /// (undesired state, desired state).
    pub target_transition: (String, String),
    pub uplift: f64,
    pub undesired_rule: ClassificationRule,
    pub desired_rule: ClassificationRule,
}

impl ActionRule {
    /// Number of terms that actually change a value.
    pub fn changed_count(&self) -> usize {
        self.actions.iter().filter(|a| a.is_change()).count()
    }

    /// Attribute-level constraint set used for dominance comparison: the
    /// stable conditions plus all flexible terms.
    pub fn constraint_signature(&self) -> std::collections::BTreeSet<String> {
        let mut set = std::collections::BTreeSet::new();
        for item in &self.stable_conditions {
            set.insert(format!("s|{}|{}", item.attribute, item.value));
        }
        for term in &self.actions {
            set.insert(format!("f|{}|{}|{}", term.attribute, term.from, term.to));
        }
        set
    }

    /// Canonical one-line rendering, used for deterministic ordering.
    pub fn display_string(&self) -> String {
        let mut parts: Vec<String> =
            self.stable_conditions.iter().map(|i| i.to_string()).collect();
        parts.extend(self.actions.iter().map(|a| a.to_string()));
        format!(
            "{} => {} = ({} -> {})",
            parts.join(" AND "),
            self.target,
            self.target_transition.0,
            self.target_transition.1
        )
    }
}

impl std::fmt::Display for ActionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} with uplift {:.2}%",
            self.display_string(),
            self.uplift * 100.0
        )
    }
}

/// Full result of one mining run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleReport {
    pub settings: MiningSettings,
    pub dataset_size: u64,
    pub discovered: Vec<ActionRule>,
    /// Present unless dominance reduction was disabled for the run.
    pub dominant: Option<Vec<ActionRule>>,
}

/// Uplift of pairing an undesired-state rule with a desired-state rule:
///
/// `(conf_d - (1 - conf_u)) * (supp_u / conf_u) / dataset_size`
///
/// The result is the expected fraction of the dataset flipped by the action
/// and may be negative (such pairs are normally filtered out upstream).
pub fn compute_uplift(
    undesired: &ClassificationRule,
    desired: &ClassificationRule,
    dataset_size: u64,
) -> f64 {
    debug_assert!(dataset_size >= 1);
    let conf_u = undesired.confidence;
    let conf_d = desired.confidence;
    (conf_d - (1.0 - conf_u)) * (undesired.support as f64 / conf_u) / dataset_size as f64
}

/// Pair undesired-state and desired-state classification rules into action
/// rules.
///
/// A pair qualifies when (a) its stable-attribute items are identical,
/// (b) both sides condition exactly the same set of flexible attributes,
/// (c) at least `min_flexible_attributes` of those change value, and
/// (d) the consequents are the settings' undesired and desired target
/// states. Flexible attributes equal on both sides stay in the rule as
/// unchanged context. Negative-uplift pairs are dropped unless the settings
/// retain them.
pub fn pair_action_rules(
    undesired_rules: &[ClassificationRule],
    desired_rules: &[ClassificationRule],
    settings: &MiningSettings,
    dataset_size: u64,
) -> Result<Vec<ActionRule>, MiningError> {
    settings.validate()?;
    let undesired_item = Item::new(&settings.target, &settings.undesired_state);
    let desired_item = Item::new(&settings.target, &settings.desired_state);

    let mut out = Vec::new();
    for r_u in undesired_rules {
        if r_u.consequent != undesired_item {
            continue;
        }
        let (stable_u, flexible_u) = split_antecedent(r_u, settings)?;
        if stable_u.len() < settings.min_stable_attributes {
            continue;
        }
        for r_d in desired_rules {
            if r_d.consequent != desired_item {
                continue;
            }
            let (stable_d, flexible_d) = split_antecedent(r_d, settings)?;
            if stable_u != stable_d {
                continue;
            }
            if flexible_u.keys().ne(flexible_d.keys()) {
                continue;
            }
            let changed = flexible_u
                .iter()
                .filter(|(attr, from)| flexible_d[**attr] != **from)
                .count();
            if changed < settings.min_flexible_attributes {
                continue;
            }
            let uplift = compute_uplift(r_u, r_d, dataset_size);
            if uplift < 0.0 && !settings.keep_negative_uplift {
                continue;
            }
            let actions: Vec<ActionTerm> = flexible_u
                .iter()
                .map(|(attr, from)| ActionTerm {
                    attribute: (*attr).to_string(),
                    from: (*from).to_string(),
                    to: flexible_d[*attr].to_string(),
                })
                .collect();
            out.push(ActionRule {
                stable_conditions: stable_u
                    .iter()
                    .map(|(a, v)| Item::new(*a, *v))
                    .collect(),
                actions,
                target: settings.target.clone(),
                target_transition: (
                    settings.undesired_state.clone(),
                    settings.desired_state.clone(),
                ),
                uplift,
                undesired_rule: r_u.clone(),
                desired_rule: r_d.clone(),
            });
        }
    }
    sort_rules(&mut out);
    Ok(out)
}

type SplitAntecedent<'r> = (
    BTreeMap<&'r str, &'r str>, // stable attribute -> value
    BTreeMap<&'r str, &'r str>, // flexible attribute -> value
);

fn split_antecedent<'r>(
    rule: &'r ClassificationRule,
    settings: &MiningSettings,
) -> Result<SplitAntecedent<'r>, MiningError> {
    let mut stable = BTreeMap::new();
    let mut flexible = BTreeMap::new();
    for item in &rule.antecedent {
        if settings.stable_attributes.contains(&item.attribute) {
            stable.insert(item.attribute.as_str(), item.value.as_str());
        } else if settings.flexible_attributes.contains(&item.attribute) {
            flexible.insert(item.attribute.as_str(), item.value.as_str());
        } else {
            return Err(MiningError::Settings(format!(
                "rule conditions attribute `{}` which is neither stable nor flexible",
                item.attribute
            )));
        }
    }
    Ok((stable, flexible))
}

/// Keep only dominant rules: rule B is removed iff some rule A's constraint
/// set is a strict subset of B's with uplift(A) >= uplift(B) (same target
/// transition). Equal uplift therefore favors the shorter rule; incomparable
/// rules always survive.
pub fn reduce_dominant(rules: &[ActionRule]) -> Vec<ActionRule> {
    let signatures: Vec<_> = rules.iter().map(|r| r.constraint_signature()).collect();
    let mut kept: Vec<ActionRule> = Vec::new();
    for (b, rule) in rules.iter().enumerate() {
        let dominated = rules.iter().enumerate().any(|(a, other)| {
            a != b
                && other.target_transition == rule.target_transition
                && other.uplift >= rule.uplift
                && signatures[a].len() < signatures[b].len()
                && signatures[a].is_subset(&signatures[b])
        });
        if !dominated {
            kept.push(rule.clone());
        }
    }
    sort_rules(&mut kept);
    kept
}

fn sort_rules(rules: &mut [ActionRule]) {
    rules.sort_by(|a, b| {
        b.uplift
            .partial_cmp(&a.uplift)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.display_string().cmp(&b.display_string()))
    });
}

/// Run a full action-rule mining pass over a table.
///
/// Rows without a target value drop out of the transaction set; the
/// remaining row count is the dataset size used by uplift. Classification
/// rules for the undesired and desired states are mined with their
/// respective thresholds, paired, and optionally reduced to the dominant
/// subset.
pub fn mine_action_rules(
    table: &AugmentedTable,
    settings: &MiningSettings,
) -> Result<RuleReport, MiningError> {
    settings.validate()?;
    for attr in settings.attribute_universe().iter().chain([&settings.target]) {
        match table.column(attr) {
            Some(c) if c.kind.is_encoded() => {}
            Some(_) => {
                return Err(MiningError::Table(format!(
                    "column `{attr}` is not categorical/ordinal/binary"
                )))
            }
            None => {
                return Err(MiningError::Table(format!(
                    "column `{attr}` not present in the table"
                )))
            }
        }
    }

    let transactions: Vec<Vec<Item>> = to_transactions(table)
        .into_iter()
        .filter(|t| t.iter().any(|i| i.attribute == settings.target))
        .collect();
    let dataset_size = transactions.len() as u64;
    if dataset_size == 0 {
        return Ok(RuleReport {
            settings: settings.clone(),
            dataset_size: 0,
            discovered: Vec::new(),
            dominant: settings.reduce_dominant.then(Vec::new),
        });
    }

    let universe = settings.attribute_universe();
    let undesired_rules = mine_classification_rules(
        &transactions,
        &Item::new(&settings.target, &settings.undesired_state),
        settings.min_undesired_support,
        settings.min_undesired_confidence,
        &universe,
    );
    let desired_rules = mine_classification_rules(
        &transactions,
        &Item::new(&settings.target, &settings.desired_state),
        settings.min_desired_support,
        settings.min_desired_confidence,
        &universe,
    );
    let discovered = pair_action_rules(&undesired_rules, &desired_rules, settings, dataset_size)?;
    let dominant = settings
        .reduce_dominant
        .then(|| reduce_dominant(&discovered));
    Ok(RuleReport {
        settings: settings.clone(),
        dataset_size,
        discovered,
        dominant,
    })
}
