//! Prediction-time explanation: find the rules a patient satisfies, rank
//! them, and pick a small diversified subset for display.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::curation::{CategoryWeights, Classifier, ClassifierRule, Intervention, ItemAnnotations};
use crate::data::{Instance, Item, ItemMatcher, Schema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionAlgorithm {
    /// Prefer rules sharing no tracked item with earlier picks.
    #[default]
    Disjoint,
    /// Greedy pick by category weight of not-yet-covered actionable items.
    Weighted,
}

/// Which items count for disjointness of actionable rules in
/// [`select_disjoint`]. Nonactionable rules always track all their items.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisjointItems {
    #[default]
    Actionable,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationConfig {
    pub n_r: usize,
    #[serde(default)]
    pub algorithm: SelectionAlgorithm,
    pub show_nonactionable: bool,
    /// Return every applicable rule, ranked, instead of a top-`n_r` selection.
    #[serde(default)]
    pub full_view: bool,
    #[serde(default)]
    pub disjoint_items: DisjointItems,
    /// Overrides the classifier's weights for the weighted algorithm.
    #[serde(default)]
    pub category_weights: Option<CategoryWeights>,
}

impl Default for ExplanationConfig {
    fn default() -> Self {
        ExplanationConfig {
            n_r: 5,
            algorithm: SelectionAlgorithm::Disjoint,
            show_nonactionable: true,
            full_view: false,
            disjoint_items: DisjointItems::Actionable,
            category_weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRule {
    pub id: String,
    pub items: Vec<Item>,
    pub lhs: String,
    pub confidence: f64,
    pub support: f64,
    pub actionable: bool,
    pub interventions: Vec<Intervention>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub patient_id: String,
    pub predicted_value: String,
    pub rules: Vec<ReportRule>,
    pub truncated: bool,
    pub total_applicable: usize,
    pub total_actionable_applicable: usize,
}

/// A classifier with its rules resolved against a schema.
pub struct ExplainIndex<'a> {
    classifier: &'a Classifier,
    matchers: Vec<Vec<ItemMatcher>>,
    items: ItemAnnotations,
}

impl<'a> ExplainIndex<'a> {
    pub fn new(classifier: &'a Classifier, schema: &Schema) -> Result<Self> {
        let matchers = classifier
            .rules
            .iter()
            .map(|r| {
                r.rule
                    .items
                    .iter()
                    .map(|i| schema.compile_item(i))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(ExplainIndex {
            classifier,
            matchers,
            items: classifier.item_annotations(),
        })
    }

    pub fn classifier(&self) -> &'a Classifier {
        self.classifier
    }

    pub fn item_annotations(&self) -> &ItemAnnotations {
        &self.items
    }

    /// Rules for `predicted_value` whose every item the instance satisfies.
    pub fn applicable(&self, instance: &Instance, predicted_value: &str) -> Vec<&'a ClassifierRule> {
        self.classifier
            .rules
            .iter()
            .zip(&self.matchers)
            .filter(|(r, m)| {
                r.rule.class_value == predicted_value && m.iter().all(|m| m.matches(instance))
            })
            .map(|(r, _)| r)
            .collect()
    }

    pub fn is_actionable_item(&self, item: &Item) -> bool {
        self.items.get(&item.id()).is_some_and(|a| a.actionable())
    }
}

/// Matches `rules` against one instance without a prebuilt index.
pub fn applicable_rules<'a>(
    schema: &Schema,
    instance: &Instance,
    rules: &'a [ClassifierRule],
    predicted_value: &str,
) -> Result<Vec<&'a ClassifierRule>> {
    let mut out = Vec::new();
    for r in rules.iter().filter(|r| r.rule.class_value == predicted_value) {
        let mut all = true;
        for item in &r.rule.items {
            if !schema.compile_item(item)?.matches(instance) {
                all = false;
                break;
            }
        }
        if all {
            out.push(r);
        }
    }
    Ok(out)
}

fn rank_cmp(a: &ClassifierRule, b: &ClassifierRule) -> Ordering {
    b.actionable()
        .cmp(&a.actionable())
        .then_with(|| b.rule.confidence.total_cmp(&a.rule.confidence))
        .then_with(|| b.rule.support.total_cmp(&a.rule.support))
        .then_with(|| a.rule.id.cmp(&b.rule.id))
}

/// Actionable rules first; within each block confidence descending, then
/// support descending, then id.
pub fn rank_rules(mut rules: Vec<&ClassifierRule>) -> Vec<&ClassifierRule> {
    rules.sort_by(|a, b| rank_cmp(a, b));
    rules
}

/// Picks up to `capacity` positions from `block`: everything when it fits,
/// otherwise the top rule, then each later rule sharing no tracked item with
/// the picks so far, then (if still short) unchosen rules in list order.
fn diversify<F>(block: &[&ClassifierRule], capacity: usize, tracked: F) -> Vec<usize>
where
    F: Fn(&ClassifierRule) -> Vec<String>,
{
    if block.len() <= capacity {
        return (0..block.len()).collect();
    }
    if capacity == 0 {
        return Vec::new();
    }
    let mut chosen = vec![0];
    let mut used: HashSet<String> = tracked(block[0]).into_iter().collect();
    for (i, rule) in block.iter().enumerate().skip(1) {
        if chosen.len() == capacity {
            break;
        }
        let items = tracked(rule);
        if items.iter().all(|it| !used.contains(it)) {
            chosen.push(i);
            used.extend(items);
        }
    }
    if chosen.len() < capacity {
        let picked: HashSet<usize> = chosen.iter().copied().collect();
        let rest: Vec<usize> = (0..block.len()).filter(|i| !picked.contains(i)).collect();
        chosen.extend(rest.into_iter().take(capacity - chosen.len()));
    }
    chosen
}

fn all_item_ids(rule: &ClassifierRule) -> Vec<String> {
    rule.rule.items.iter().map(Item::id).collect()
}

fn actionable_item_ids(rule: &ClassifierRule, items: &ItemAnnotations) -> Vec<String> {
    rule.rule
        .items
        .iter()
        .map(Item::id)
        .filter(|id| items.get(id).is_some_and(|a| a.actionable()))
        .collect()
}

/// Item-disjoint selection over a ranked list: actionable rules first, then,
/// if room remains, nonactionable rules chosen the same way on their own.
/// Returns rules in pick order.
pub fn select_disjoint<'a>(
    ranked: &[&'a ClassifierRule],
    n_r: usize,
    items: &ItemAnnotations,
    mode: DisjointItems,
) -> Vec<&'a ClassifierRule> {
    let (actionable, nonactionable): (Vec<&ClassifierRule>, Vec<&ClassifierRule>) =
        ranked.iter().partition(|r| r.actionable());
    let mut out: Vec<&ClassifierRule> = match mode {
        DisjointItems::Actionable => {
            diversify(&actionable, n_r, |r| actionable_item_ids(r, items))
        }
        DisjointItems::All => diversify(&actionable, n_r, all_item_ids),
    }
    .into_iter()
    .map(|i| actionable[i])
    .collect();
    let room = n_r - out.len();
    out.extend(
        diversify(&nonactionable, room, all_item_ids)
            .into_iter()
            .map(|i| nonactionable[i]),
    );
    out
}

/// Category-weighted greedy selection over ranked actionable rules.
///
/// Each actionable item starts at its category's weight; a rule weighs the sum
/// of its actionable items. Each round picks the heaviest unchosen rule (the
/// first in rank order on ties) and zeroes its items' weights. Returns rules
/// in pick order.
pub fn select_weighted<'a>(
    ranked_actionable: &[&'a ClassifierRule],
    n_r: usize,
    items: &ItemAnnotations,
    weights: &CategoryWeights,
) -> Result<Vec<&'a ClassifierRule>> {
    weights.validate()?;
    let mut item_weight: BTreeMap<String, f64> = BTreeMap::new();
    let mut rule_items: Vec<Vec<String>> = Vec::with_capacity(ranked_actionable.len());
    for rule in ranked_actionable {
        let ids = actionable_item_ids(rule, items);
        for id in &ids {
            if item_weight.contains_key(id) {
                continue;
            }
            let category = items[id].category.as_deref().ok_or_else(|| {
                Error::Config(format!("actionable item `{id}` has no category"))
            })?;
            let w = weights.get(category).ok_or_else(|| {
                Error::Config(format!("category `{category}` of item `{id}` has no weight"))
            })?;
            item_weight.insert(id.clone(), w);
        }
        rule_items.push(ids);
    }

    let mut chosen = vec![false; ranked_actionable.len()];
    let mut out = Vec::new();
    for _ in 0..n_r.min(ranked_actionable.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (i, ids) in rule_items.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            let w: f64 = ids.iter().map(|id| item_weight[id]).sum();
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        let Some((i, _)) = best else { break };
        chosen[i] = true;
        for id in &rule_items[i] {
            item_weight.insert(id.clone(), 0.0);
        }
        out.push(ranked_actionable[i]);
    }
    Ok(out)
}

fn report_rule(rule: &ClassifierRule) -> ReportRule {
    ReportRule {
        id: rule.rule.id.clone(),
        items: rule.rule.items.clone(),
        lhs: rule.rule.render_lhs(),
        confidence: rule.rule.confidence,
        support: rule.rule.support,
        actionable: rule.actionable(),
        interventions: rule.interventions.clone(),
    }
}

/// Explains one externally made prediction of an interesting value.
pub fn explain(
    instance: &Instance,
    predicted_value: &str,
    index: &ExplainIndex<'_>,
    config: &ExplanationConfig,
) -> Result<ExplanationReport> {
    if config.n_r == 0 {
        return Err(Error::Config("n_r must be at least 1".into()));
    }
    if !index
        .classifier
        .interesting_values
        .iter()
        .any(|v| v == predicted_value)
    {
        return Err(Error::Invalid(format!(
            "`{predicted_value}` is not an interesting value; nothing to explain"
        )));
    }
    let weights = match config.algorithm {
        SelectionAlgorithm::Weighted => Some(
            config
                .category_weights
                .as_ref()
                .or(index.classifier.category_weights.as_ref())
                .ok_or_else(|| Error::Config("weighted selection needs category weights".into()))?,
        ),
        SelectionAlgorithm::Disjoint => None,
    };

    let ranked = rank_rules(index.applicable(instance, predicted_value));
    let total_applicable = ranked.len();
    let total_actionable_applicable = ranked.iter().filter(|r| r.actionable()).count();
    let candidates: Vec<&ClassifierRule> = ranked
        .iter()
        .copied()
        .filter(|r| config.show_nonactionable || r.actionable())
        .collect();

    let mut selected: Vec<&ClassifierRule> = if config.full_view {
        candidates.clone()
    } else if let Some(weights) = weights {
        let (actionable, nonactionable): (Vec<&ClassifierRule>, Vec<&ClassifierRule>) =
            candidates.iter().partition(|r| r.actionable());
        let mut picks = select_weighted(&actionable, config.n_r, &index.items, weights)?;
        let room = config.n_r - picks.len();
        picks.extend(
            diversify(&nonactionable, room, all_item_ids)
                .into_iter()
                .map(|i| nonactionable[i]),
        );
        picks
    } else {
        select_disjoint(&candidates, config.n_r, &index.items, config.disjoint_items)
    };

    // Display in rank order.
    let position: BTreeMap<&str, usize> = ranked
        .iter()
        .enumerate()
        .map(|(i, r)| (r.rule.id.as_str(), i))
        .collect();
    selected.sort_by_key(|r| position[r.rule.id.as_str()]);

    Ok(ExplanationReport {
        patient_id: instance.id.clone(),
        predicted_value: predicted_value.to_string(),
        truncated: selected.len() < candidates.len(),
        rules: selected.into_iter().map(report_rule).collect(),
        total_applicable,
        total_actionable_applicable,
    })
}
