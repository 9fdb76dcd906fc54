//! Levelwise classification-rule search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::tabular::Item;

use super::ClassificationRule;

/// Mine all rules `antecedent => target_item` with absolute support at least
/// `min_support` and confidence at least `min_confidence`.
///
/// Antecedents draw at most one item per attribute from
/// `attribute_universe` (the target attribute is always excluded).
/// Candidates are generated levelwise; a candidate whose antecedent cover
/// falls below `min_support` cannot yield a qualifying extension and is
/// pruned. Results are sorted by antecedent.
pub fn mine_classification_rules(
    transactions: &[Vec<Item>],
    target_item: &Item,
    min_support: u64,
    min_confidence: f64,
    attribute_universe: &BTreeSet<String>,
) -> Vec<ClassificationRule> {
    assert!(min_support >= 1, "min_support must be at least 1");
    assert!(
        min_confidence > 0.0 && min_confidence <= 1.0,
        "min_confidence must be in (0, 1]"
    );
    if transactions.is_empty() || min_support > transactions.len() as u64 {
        return Vec::new();
    }

    // Intern eligible items; ids are assigned in sorted item order so that
    // id-sorted candidate vectors are also lexicographically canonical.
    let mut universe_items: BTreeSet<&Item> = BTreeSet::new();
    for transaction in transactions {
        for item in transaction {
            if item.attribute != target_item.attribute
                && attribute_universe.contains(&item.attribute)
            {
                universe_items.insert(item);
            }
        }
    }
    let items: Vec<&Item> = universe_items.into_iter().collect();
    if items.is_empty() {
        return Vec::new();
    }
    let id_of: HashMap<&Item, u32> = items
        .iter()
        .enumerate()
        .map(|(i, item)| (*item, i as u32))
        .collect();
    let attr_of: Vec<&str> = items.iter().map(|i| i.attribute.as_str()).collect();

    // Encoded transactions: sorted eligible item ids plus the target flag.
    let encoded: Vec<(Vec<u32>, bool)> = transactions
        .iter()
        .map(|transaction| {
            let mut ids: Vec<u32> = transaction
                .iter()
                .filter_map(|item| id_of.get(item).copied())
                .collect();
            ids.sort_unstable();
            let has_target = transaction.iter().any(|i| i == target_item);
            (ids, has_target)
        })
        .collect();

    let mut rules = Vec::new();
    // level 1
    let mut frontier: Vec<Vec<u32>> = Vec::new();
    {
        let mut cover: BTreeMap<u32, u64> = BTreeMap::new();
        let mut support: BTreeMap<u32, u64> = BTreeMap::new();
        for (ids, has_target) in &encoded {
            for &id in ids {
                *cover.entry(id).or_default() += 1;
                if *has_target {
                    *support.entry(id).or_default() += 1;
                }
            }
        }
        for (&id, &c) in &cover {
            if c < min_support {
                continue;
            }
            frontier.push(vec![id]);
            let s = support.get(&id).copied().unwrap_or(0);
            emit(&mut rules, &items, &[id], target_item, s, c, min_support, min_confidence);
        }
    }

    while !frontier.is_empty() {
        let candidates = join_level(&frontier, &attr_of);
        if candidates.is_empty() {
            break;
        }
        let mut counts: Vec<(u64, u64)> = vec![(0, 0); candidates.len()];
        for (ids, has_target) in &encoded {
            for (c, candidate) in candidates.iter().enumerate() {
                if is_subset(candidate, ids) {
                    counts[c].0 += 1;
                    if *has_target {
                        counts[c].1 += 1;
                    }
                }
            }
        }
        let mut next = Vec::new();
        for (candidate, (cover, support)) in candidates.into_iter().zip(counts) {
            if cover < min_support {
                continue;
            }
            emit(
                &mut rules,
                &items,
                &candidate,
                target_item,
                support,
                cover,
                min_support,
                min_confidence,
            );
            next.push(candidate);
        }
        frontier = next;
    }

    rules.sort_by(|a, b| a.antecedent.cmp(&b.antecedent));
    rules
}

#[allow(clippy::too_many_arguments)]
fn emit(
    rules: &mut Vec<ClassificationRule>,
    items: &[&Item],
    antecedent_ids: &[u32],
    target_item: &Item,
    support: u64,
    cover: u64,
    min_support: u64,
    min_confidence: f64,
) {
    if support < min_support {
        return;
    }
    let confidence = support as f64 / cover as f64;
    if confidence < min_confidence {
        return;
    }
    rules.push(ClassificationRule {
        antecedent: antecedent_ids
            .iter()
            .map(|&id| items[id as usize].clone())
            .collect(),
        consequent: target_item.clone(),
        support,
        cover,
        confidence,
    });
}

/// Apriori join: combine two k-sets sharing their first k-1 elements, keep
/// one item per attribute, and prune candidates with an infrequent subset.
fn join_level(frontier: &[Vec<u32>], attr_of: &[&str]) -> Vec<Vec<u32>> {
    let frontier_set: HashSet<&[u32]> = frontier.iter().map(|v| v.as_slice()).collect();
    let mut candidates = Vec::new();
    for (i, a) in frontier.iter().enumerate() {
        for b in &frontier[i + 1..] {
            let k = a.len();
            if a[..k - 1] != b[..k - 1] {
                continue;
            }
            let (last_a, last_b) = (a[k - 1], b[k - 1]);
            if attr_of[last_a as usize] == attr_of[last_b as usize] {
                continue;
            }
            let mut candidate = a.clone();
            candidate.push(last_b.max(last_a));
            candidate[k - 1] = last_a.min(last_b);
            // one item per attribute across the whole candidate
            let mut attrs: Vec<&str> = candidate.iter().map(|&id| attr_of[id as usize]).collect();
            attrs.sort_unstable();
            if attrs.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            // downward closure on the frontier
            let mut all_subsets_frequent = true;
            let mut subset = candidate.clone();
            for drop in 0..candidate.len() {
                subset.remove(drop);
                if !frontier_set.contains(subset.as_slice()) {
                    all_subsets_frequent = false;
                }
                subset.insert(drop, candidate[drop]);
                if !all_subsets_frequent {
                    break;
                }
            }
            if all_subsets_frequent {
                candidates.push(candidate);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    candidates
}

fn is_subset(needle: &[u32], haystack: &[u32]) -> bool {
    let mut it = haystack.iter();
    'outer: for want in needle {
        for have in it.by_ref() {
            match have.cmp(want) {
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Less => {}
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(attr: &str, value: &str) -> Item {
        Item::new(attr, value)
    }

    fn universe(attrs: &[&str]) -> BTreeSet<String> {
        attrs.iter().map(|a| a.to_string()).collect()
    }

    /// D = [{a1,x},{a1,y},{a1,x},{b1,x}] with target x.
    fn toy_transactions() -> Vec<Vec<Item>> {
        vec![
            vec![item("a", "1"), item("t", "x")],
            vec![item("a", "1"), item("t", "y")],
            vec![item("a", "1"), item("t", "x")],
            vec![item("b", "1"), item("t", "x")],
        ]
    }

    #[test]
    fn toy_rule_support_and_confidence() {
        let rules = mine_classification_rules(
            &toy_transactions(),
            &item("t", "x"),
            2,
            0.6,
            &universe(&["a", "b"]),
        );
        assert_eq!(rules.len(), 1);
        let rule = &rules[0];
        assert_eq!(rule.antecedent, vec![item("a", "1")]);
        assert_eq!(rule.support, 2);
        assert_eq!(rule.cover, 3);
        assert!((rule.confidence - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn confidence_threshold_is_inclusive_boundary() {
        // conf = 2/3; at min_confidence 1.0 the rule disappears
        let rules = mine_classification_rules(
            &toy_transactions(),
            &item("t", "x"),
            2,
            1.0,
            &universe(&["a", "b"]),
        );
        assert!(rules.iter().all(|r| r.antecedent != vec![item("a", "1")]));
        // exactly at 2/3 it stays
        let rules = mine_classification_rules(
            &toy_transactions(),
            &item("t", "x"),
            2,
            2.0 / 3.0,
            &universe(&["a", "b"]),
        );
        assert_eq!(rules.len(), 1);
    }

    #[test]
    fn empty_transactions_give_empty_result() {
        let rules =
            mine_classification_rules(&[], &item("t", "x"), 1, 0.5, &universe(&["a"]));
        assert!(rules.is_empty());
    }

    #[test]
    fn min_support_above_dataset_gives_empty_result() {
        let rules = mine_classification_rules(
            &toy_transactions(),
            &item("t", "x"),
            5,
            0.5,
            &universe(&["a", "b"]),
        );
        assert!(rules.is_empty());
    }

    #[test]
    fn engineered_seventy_cover_fifty_hits() {
        // 70 transactions carry the pattern, 50 of them with the undesired
        // target; extra background rows are noise
        let mut txs = Vec::new();
        for i in 0..70 {
            let target = if i < 50 { "bad" } else { "good" };
            txs.push(vec![
                item("area", "chemistry"),
                item("rigor", "medium"),
                item("evaluation", target),
            ]);
        }
        for i in 0..30 {
            txs.push(vec![
                item("area", "physics"),
                item("rigor", "high"),
                item("evaluation", if i % 2 == 0 { "good" } else { "bad" }),
            ]);
        }
        let rules = mine_classification_rules(
            &txs,
            &item("evaluation", "bad"),
            40,
            0.7,
            &universe(&["area", "rigor"]),
        );
        let rule = rules
            .iter()
            .find(|r| {
                r.antecedent
                    == vec![item("area", "chemistry"), item("rigor", "medium")]
            })
            .expect("engineered rule is found");
        assert_eq!(rule.support, 50);
        assert!((rule.confidence - 0.714).abs() < 1e-3);
    }

    #[test]
    fn one_item_per_attribute_is_enforced() {
        // attribute `a` takes two values across transactions; no antecedent
        // may contain both
        let txs = vec![
            vec![item("a", "1"), item("a", "2"), item("t", "x")],
            vec![item("a", "1"), item("a", "2"), item("t", "x")],
        ];
        let rules =
            mine_classification_rules(&txs, &item("t", "x"), 1, 0.1, &universe(&["a"]));
        assert!(rules.iter().all(|r| r.antecedent.len() == 1));
    }

    #[test]
    fn downward_closure_invariant_holds() {
        let txs = toy_transactions();
        let rules = mine_classification_rules(
            &txs,
            &item("t", "x"),
            1,
            0.1,
            &universe(&["a", "b"]),
        );
        for rule in &rules {
            for drop in 0..rule.antecedent.len() {
                let mut subset = rule.antecedent.clone();
                subset.remove(drop);
                let cover = txs
                    .iter()
                    .filter(|t| subset.iter().all(|i| t.contains(i)))
                    .count() as u64;
                assert!(cover >= rule.support);
            }
        }
    }

    #[test]
    fn recounting_reproduces_stored_support_and_confidence() {
        let txs = toy_transactions();
        let target = item("t", "x");
        let rules = mine_classification_rules(&txs, &target, 1, 0.1, &universe(&["a", "b"]));
        assert!(!rules.is_empty());
        for rule in &rules {
            let cover = txs
                .iter()
                .filter(|t| rule.antecedent.iter().all(|i| t.contains(i)))
                .count() as u64;
            let support = txs
                .iter()
                .filter(|t| {
                    rule.antecedent.iter().all(|i| t.contains(i)) && t.contains(&target)
                })
                .count() as u64;
            assert_eq!(rule.cover, cover);
            assert_eq!(rule.support, support);
            assert_eq!(rule.confidence, support as f64 / cover as f64);
        }
    }
}
