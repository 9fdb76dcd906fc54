//! Brute-force oracle equivalence for the rule miner.
//!
//! The oracle enumerates every antecedent (at most one item per attribute)
//! directly from raw row data, counts cover and support by scanning rows,
//! pairs qualifying rules by checking the pairing conditions literally, and
//! evaluates uplift with the formula written out inline. It shares no code
//! with the mining path it checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use featmine::mining::{
    mine_action_rules, mine_classification_rules, ActionRule, MiningSettings,
};
use featmine::tabular::{AugmentedTable, Column, ColumnKind, Item};

/// Raw row data: one Option<String> per (attribute, row), plus the target.
struct RawTable {
    attributes: Vec<String>,
    values: Vec<Vec<Option<String>>>,
    target_name: String,
    target: Vec<Option<String>>,
}

impl RawTable {
    fn n_rows(&self) -> usize {
        self.target.len()
    }

    fn to_table(&self) -> AugmentedTable {
        let mut columns = Vec::new();
        for (a, name) in self.attributes.iter().enumerate() {
            let refs: Vec<Option<&str>> = self.values[a].iter().map(|v| v.as_deref()).collect();
            let mut cats: Vec<String> = refs.iter().flatten().map(|s| s.to_string()).collect();
            cats.sort();
            cats.dedup();
            columns.push(Column::from_raw(name, ColumnKind::Categorical, cats, &refs).unwrap());
        }
        let refs: Vec<Option<&str>> = self.target.iter().map(|v| v.as_deref()).collect();
        let mut cats: Vec<String> = refs.iter().flatten().map(|s| s.to_string()).collect();
        cats.sort();
        cats.dedup();
        columns.push(
            Column::from_raw(&self.target_name, ColumnKind::Categorical, cats, &refs).unwrap(),
        );
        AugmentedTable::new(
            columns,
            self.target_name.clone(),
            (0..self.n_rows()).map(|i| format!("r{i:06}")).collect(),
        )
        .unwrap()
    }
}

/// A brute-force classification rule.
#[derive(Debug, Clone, PartialEq)]
struct BruteRule {
    antecedent: Vec<(String, String)>, // sorted by attribute
    support: u64,
    cover: u64,
    confidence: f64,
}

/// Enumerate every rule `antecedent => target = state` meeting the
/// thresholds, scanning raw rows for the counts. Rows without a target
/// value are excluded up front (mirroring the mining contract).
fn brute_force_rules(
    raw: &RawTable,
    universe: &BTreeSet<String>,
    state: &str,
    min_support: u64,
    min_confidence: f64,
) -> Vec<BruteRule> {
    let rows: Vec<usize> = (0..raw.n_rows())
        .filter(|&r| raw.target[r].is_some())
        .collect();

    // observed values per universe attribute
    let mut attr_values: Vec<(usize, Vec<String>)> = Vec::new();
    for (a, name) in raw.attributes.iter().enumerate() {
        if !universe.contains(name) {
            continue;
        }
        let mut vals: Vec<String> = rows
            .iter()
            .filter_map(|&r| raw.values[a][r].clone())
            .collect();
        vals.sort();
        vals.dedup();
        attr_values.push((a, vals));
    }

    // cartesian product over (skip | value) per attribute
    let mut antecedents: Vec<Vec<(usize, String)>> = vec![Vec::new()];
    for (a, vals) in &attr_values {
        let mut next = Vec::new();
        for partial in &antecedents {
            next.push(partial.clone());
            for v in vals {
                let mut with = partial.clone();
                with.push((*a, v.clone()));
                next.push(with);
            }
        }
        antecedents = next;
    }

    let mut out = Vec::new();
    for antecedent in antecedents.into_iter().filter(|a| !a.is_empty()) {
        let mut cover = 0u64;
        let mut support = 0u64;
        for &r in &rows {
            let covered = antecedent
                .iter()
                .all(|(a, v)| raw.values[*a][r].as_deref() == Some(v.as_str()));
            if covered {
                cover += 1;
                if raw.target[r].as_deref() == Some(state) {
                    support += 1;
                }
            }
        }
        if support < min_support || cover == 0 {
            continue;
        }
        let confidence = support as f64 / cover as f64;
        if confidence < min_confidence {
            continue;
        }
        out.push(BruteRule {
            antecedent: antecedent
                .into_iter()
                .map(|(a, v)| (raw.attributes[a].clone(), v))
                .collect(),
            support,
            cover,
            confidence,
        });
    }
    out
}

/// A brute-force action rule, canonicalized for set comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct BruteAction {
    stable: Vec<(String, String)>,
    actions: Vec<(String, String, String)>,
    // uplift scaled to integer microunits for exact set comparison
    uplift_micro: i64,
}

fn brute_force_actions(
    raw: &RawTable,
    settings: &MiningSettings,
) -> Vec<BruteAction> {
    let universe = settings.attribute_universe();
    let undesired = brute_force_rules(
        raw,
        &universe,
        &settings.undesired_state,
        settings.min_undesired_support,
        settings.min_undesired_confidence,
    );
    let desired = brute_force_rules(
        raw,
        &universe,
        &settings.desired_state,
        settings.min_desired_support,
        settings.min_desired_confidence,
    );
    let dataset_size = (0..raw.n_rows()).filter(|&r| raw.target[r].is_some()).count() as f64;

    let split = |rule: &BruteRule| {
        let mut stable = BTreeMap::new();
        let mut flexible = BTreeMap::new();
        for (attr, value) in &rule.antecedent {
            if settings.stable_attributes.contains(attr) {
                stable.insert(attr.clone(), value.clone());
            } else {
                flexible.insert(attr.clone(), value.clone());
            }
        }
        (stable, flexible)
    };

    let mut out = Vec::new();
    for r_u in &undesired {
        let (stable_u, flex_u) = split(r_u);
        if stable_u.len() < settings.min_stable_attributes {
            continue;
        }
        for r_d in &desired {
            let (stable_d, flex_d) = split(r_d);
            if stable_u != stable_d {
                continue;
            }
            let keys_u: BTreeSet<&String> = flex_u.keys().collect();
            let keys_d: BTreeSet<&String> = flex_d.keys().collect();
            if keys_u != keys_d {
                continue;
            }
            let changed = flex_u.iter().filter(|(k, v)| flex_d[*k] != **v).count();
            if changed < settings.min_flexible_attributes {
                continue;
            }
            // Eq. 5 written out directly
            let uplift = (r_d.confidence - (1.0 - r_u.confidence))
                * (r_u.support as f64 / r_u.confidence)
                / dataset_size;
            if uplift < 0.0 && !settings.keep_negative_uplift {
                continue;
            }
            out.push(BruteAction {
                stable: stable_u.iter().map(|(a, v)| (a.clone(), v.clone())).collect(),
                actions: flex_u
                    .iter()
                    .map(|(a, from)| (a.clone(), from.clone(), flex_d[a].clone()))
                    .collect(),
                uplift_micro: (uplift * 1e9).round() as i64,
            });
        }
    }
    out.sort();
    out
}

fn canonicalize(rule: &ActionRule) -> BruteAction {
    BruteAction {
        stable: rule
            .stable_conditions
            .iter()
            .map(|i| (i.attribute.clone(), i.value.clone()))
            .collect(),
        actions: rule
            .actions
            .iter()
            .map(|a| (a.attribute.clone(), a.from.clone(), a.to.clone()))
            .collect(),
        uplift_micro: (rule.uplift * 1e9).round() as i64,
    }
}

fn random_raw_table(rng: &mut ChaCha8Rng) -> RawTable {
    let n_attrs = rng.gen_range(3..=5);
    let n_rows = rng.gen_range(40..=200);
    let attributes: Vec<String> = (0..n_attrs).map(|a| format!("attr{a}")).collect();
    let values = (0..n_attrs)
        .map(|_| {
            let n_cats = rng.gen_range(2..=4);
            (0..n_rows)
                .map(|_| {
                    if rng.gen_bool(0.06) {
                        None
                    } else {
                        Some(format!("v{}", rng.gen_range(0..n_cats)))
                    }
                })
                .collect()
        })
        .collect();
    let n_target_cats = rng.gen_range(2..=3);
    let target = (0..n_rows)
        .map(|_| {
            if rng.gen_bool(0.04) {
                None
            } else {
                Some(format!("t{}", rng.gen_range(0..n_target_cats)))
            }
        })
        .collect();
    RawTable {
        attributes,
        values,
        target_name: "outcome".into(),
        target,
    }
}

fn random_settings(raw: &RawTable, rng: &mut ChaCha8Rng) -> MiningSettings {
    let mut stable = BTreeSet::new();
    let mut flexible = BTreeSet::new();
    for attr in &raw.attributes {
        if rng.gen_bool(0.35) {
            stable.insert(attr.clone());
        } else {
            flexible.insert(attr.clone());
        }
    }
    if flexible.is_empty() {
        let moved = stable.iter().next().unwrap().clone();
        stable.remove(&moved);
        flexible.insert(moved);
    }
    let observed: BTreeSet<String> = raw.target.iter().flatten().cloned().collect();
    let states: Vec<&String> = observed.iter().collect();
    let undesired = states[0].clone();
    let desired = states[1 % states.len()].clone();
    let n = raw.n_rows() as u64;
    MiningSettings {
        stable_attributes: stable,
        flexible_attributes: flexible,
        min_stable_attributes: rng.gen_range(0..=1),
        min_flexible_attributes: rng.gen_range(1..=2),
        min_undesired_support: rng.gen_range(n / 25..=n / 10).max(2),
        min_desired_support: rng.gen_range(n / 25..=n / 10).max(2),
        min_undesired_confidence: [0.5, 0.6, 0.7][rng.gen_range(0..3)],
        min_desired_confidence: [0.5, 0.6, 0.7][rng.gen_range(0..3)],
        target: raw.target_name.clone(),
        undesired_state: undesired,
        desired_state: desired,
        keep_negative_uplift: rng.gen_bool(0.2),
        reduce_dominant: true,
    }
}

#[test]
fn miner_matches_brute_force_on_random_tables() {
    let mut total_discovered = 0usize;
    let mut nonempty_runs = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw_table(&mut rng);
        let settings = random_settings(&raw, &mut rng);
        let table = raw.to_table();

        let report = mine_action_rules(&table, &settings).unwrap();
        let mined: Vec<BruteAction> = {
            let mut v: Vec<BruteAction> = report.discovered.iter().map(canonicalize).collect();
            v.sort();
            v
        };
        let oracle = brute_force_actions(&raw, &settings);
        assert_eq!(
            mined, oracle,
            "seed {seed}: miner and oracle disagree\nsettings: {settings:?}"
        );
        total_discovered += report.discovered.len();
        if !report.discovered.is_empty() {
            nonempty_runs += 1;
        }

        // dominance: brute-force reduction over the oracle set
        let dominant = report.dominant.as_ref().unwrap();
        let brute_dominant = brute_dominance(&oracle);
        let mut mined_dominant: Vec<BruteAction> = dominant.iter().map(canonicalize).collect();
        mined_dominant.sort();
        assert_eq!(mined_dominant, brute_dominant, "seed {seed}: dominance");
    }
    assert!(
        nonempty_runs >= 10,
        "only {nonempty_runs} runs discovered rules ({total_discovered} total); the oracle test is too vacuous"
    );
}

fn brute_dominance(rules: &[BruteAction]) -> Vec<BruteAction> {
    let token_set = |r: &BruteAction| -> BTreeSet<String> {
        r.stable
            .iter()
            .map(|(a, v)| format!("s|{a}|{v}"))
            .chain(r.actions.iter().map(|(a, f, t)| format!("f|{a}|{f}|{t}")))
            .collect()
    };
    let sets: Vec<BTreeSet<String>> = rules.iter().map(token_set).collect();
    let mut kept = Vec::new();
    for (b, rule) in rules.iter().enumerate() {
        let dominated = rules.iter().enumerate().any(|(a, other)| {
            a != b
                && other.uplift_micro >= rule.uplift_micro
                && sets[a].len() < sets[b].len()
                && sets[a].is_subset(&sets[b])
        });
        if !dominated {
            kept.push(rule.clone());
        }
    }
    kept.sort();
    kept
}

#[test]
fn pairing_matches_brute_force_on_five_attribute_synthetic() {
    // fixed five-attribute table exercising stable+flexible interplay
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let n_rows = 160;
    let attributes: Vec<String> = vec![
        "area".into(),
        "rigor".into(),
        "novelty".into(),
        "grammar".into(),
        "replicability".into(),
    ];
    let cats: Vec<Vec<&str>> = vec![
        vec!["chemistry", "physics"],
        vec!["low", "medium", "high"],
        vec!["low", "high"],
        vec!["0", "1"],
        vec!["0", "1"],
    ];
    let values: Vec<Vec<Option<String>>> = cats
        .iter()
        .map(|options| {
            (0..n_rows)
                .map(|_| Some(options[rng.gen_range(0..options.len())].to_string()))
                .collect()
        })
        .collect();
    // target correlated with rigor to produce rules
    let target: Vec<Option<String>> = (0..n_rows)
        .map(|r| {
            let rigor = values[1][r].as_deref().unwrap();
            let good = match rigor {
                "high" => rng.gen_bool(0.8),
                "medium" => rng.gen_bool(0.45),
                _ => rng.gen_bool(0.2),
            };
            Some(if good { "good" } else { "bad" }.to_string())
        })
        .collect();
    let raw = RawTable {
        attributes,
        values,
        target_name: "evaluation".into(),
        target,
    };
    let settings = MiningSettings {
        stable_attributes: ["area".to_string()].into(),
        flexible_attributes: [
            "rigor".to_string(),
            "novelty".into(),
            "grammar".into(),
            "replicability".into(),
        ]
        .into(),
        min_stable_attributes: 0,
        min_flexible_attributes: 1,
        min_undesired_support: 6,
        min_desired_support: 6,
        min_undesired_confidence: 0.6,
        min_desired_confidence: 0.6,
        target: "evaluation".into(),
        undesired_state: "bad".into(),
        desired_state: "good".into(),
        keep_negative_uplift: false,
        reduce_dominant: true,
    };
    let report = mine_action_rules(&raw.to_table(), &settings).unwrap();
    let mut mined: Vec<BruteAction> = report.discovered.iter().map(canonicalize).collect();
    mined.sort();
    let oracle = brute_force_actions(&raw, &settings);
    assert!(!oracle.is_empty(), "synthetic should produce rules");
    assert_eq!(mined, oracle);
}

#[test]
fn classification_rules_match_brute_force_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let raw = random_raw_table(&mut rng);
    let universe: BTreeSet<String> = raw.attributes.iter().cloned().collect();
    let table = raw.to_table();
    let transactions: Vec<Vec<Item>> = featmine::tabular::to_transactions(&table)
        .into_iter()
        .filter(|t| t.iter().any(|i| i.attribute == raw.target_name))
        .collect();
    let state = raw
        .target
        .iter()
        .flatten()
        .next()
        .expect("target values exist")
        .clone();
    let mined = mine_classification_rules(
        &transactions,
        &Item::new(&raw.target_name, &state),
        3,
        0.4,
        &universe,
    );
    let oracle = brute_force_rules(&raw, &universe, &state, 3, 0.4);

    let canon =
        |ant: &[(String, String)], s: u64, c: u64| -> (Vec<(String, String)>, u64, u64) {
            (ant.to_vec(), s, c)
        };
    let mut mined_set: Vec<_> = mined
        .iter()
        .map(|r| {
            canon(
                &r.antecedent
                    .iter()
                    .map(|i| (i.attribute.clone(), i.value.clone()))
                    .collect::<Vec<_>>(),
                r.support,
                r.cover,
            )
        })
        .collect();
    mined_set.sort();
    let mut oracle_set: Vec<_> = oracle
        .iter()
        .map(|r| canon(&r.antecedent, r.support, r.cover))
        .collect();
    oracle_set.sort();
    assert!(!oracle_set.is_empty());
    assert_eq!(mined_set, oracle_set);
}
