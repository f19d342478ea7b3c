//! Automatic rule pruning: redundancy elimination, the confidence-difference
//! prune, and the designer's whitelist of allowed values and bins.
//!
//! Every existence check runs against the full input of its stage, never
//! against the running survivors, so each stage's surviving set does not
//! depend on input order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{bins_from_cuts, CutTable, FeatureKind, Item, ItemValue, Schema};
use crate::error::{Error, Result};
use crate::miner::{rule_id, sort_canonical, Rule};

/// Confidence comparisons treat values this close as equal. Confidences are
/// ratios of row counts, so distinct values differ by far more than this,
/// while values re-read from 12-digit JSON differ by far less.
pub const CONFIDENCE_EPS: f64 = 1e-10;

pub const DEFAULT_DELTA: f64 = 0.10;

/// Feature → values or bins that may appear in rules. A feature missing from
/// the map allows nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllowedValues(pub BTreeMap<String, BTreeSet<ItemValue>>);

impl AllowedValues {
    pub fn allows(&self, item: &Item) -> bool {
        self.0
            .get(&item.feature)
            .is_some_and(|values| values.contains(&item.value))
    }

    /// Checks the whitelist against the schema and the discretization in use.
    /// A bin must equal one of the feature's produced bins exactly.
    pub fn validate(&self, schema: &Schema, cuts: &CutTable) -> Result<()> {
        for (name, values) in &self.0 {
            let feature = schema.feature(name).ok_or_else(|| {
                Error::Config(format!("allowed values name unknown feature `{name}`"))
            })?;
            match feature.kind {
                FeatureKind::Categorical => {
                    for v in values {
                        match v {
                            ItemValue::Category(c) if feature.values.contains(c) => {}
                            other => {
                                return Err(Error::Config(format!(
                                    "allowed value `{other}` is not a declared value of `{name}`"
                                )))
                            }
                        }
                    }
                }
                FeatureKind::Continuous => {
                    let bins = bins_from_cuts(cuts.get(name).map(Vec::as_slice).unwrap_or(&[]))?;
                    for v in values {
                        match v {
                            ItemValue::Range(b) if bins.contains(b) => {}
                            other => {
                                return Err(Error::Config(format!(
                                    "allowed value `{other}` does not match any bin of `{name}`"
                                )))
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Drops disallowed items from the universe before mining. The final rule
/// set after the whole cascade is the same as filtering after mining.
pub fn restrict_universe(items: &[Item], allowed: &AllowedValues) -> Vec<Item> {
    items.iter().filter(|i| allowed.allows(i)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub delta: f64,
    #[serde(default)]
    pub allowed: Option<AllowedValues>,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            delta: DEFAULT_DELTA,
            allowed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub count: usize,
}

/// Best confidence per (class, itemset), keyed by rule id.
fn confidence_index(rules: &[Rule]) -> HashMap<&str, f64> {
    let mut index: HashMap<&str, f64> = HashMap::with_capacity(rules.len());
    for r in rules {
        index
            .entry(r.id.as_str())
            .and_modify(|c| *c = c.max(r.confidence))
            .or_insert(r.confidence);
    }
    index
}

/// Confidences of every rule in the index whose items form a proper nonempty
/// subset of `rule`'s items, with the same class value.
fn general_confidences(rule: &Rule, index: &HashMap<&str, f64>) -> Vec<f64> {
    let m = rule.items.len();
    assert!(m < 32, "rules with {m} items are not supported");
    let full = (1u32 << m) - 1;
    let mut out = Vec::new();
    let mut subset = Vec::with_capacity(m);
    for mask in 1..full {
        subset.clear();
        subset.extend(
            (0..m)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| rule.items[bit].clone()),
        );
        if let Some(&c) = index.get(rule_id(&subset, &rule.class_value).as_str()) {
            out.push(c);
        }
    }
    out
}

fn retain_unless(rules: &[Rule], remove: impl Fn(f64, &[f64]) -> bool + Sync) -> Vec<Rule> {
    let index = confidence_index(rules);
    let keep: Vec<bool> = rules
        .par_iter()
        .map(|r| !remove(r.confidence, &general_confidences(r, &index)))
        .collect();
    rules
        .iter()
        .zip(keep)
        .filter(|&(_r, k)| k).map(|(r, _k)| r.clone())
        .collect()
}

/// Removes every rule with a strictly more general same-class rule whose
/// confidence is at least as high (equal confidence removes the specific rule).
pub fn prune_redundant(rules: &[Rule]) -> Vec<Rule> {
    retain_unless(rules, |conf, general| {
        general.iter().any(|&g| g >= conf - CONFIDENCE_EPS)
    })
}

/// Removes every rule with a strictly more general same-class rule whose
/// confidence is lower, but by no more than `delta`.
pub fn prune_confidence_diff(rules: &[Rule], delta: f64) -> Result<Vec<Rule>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!("confidence difference threshold must be in [0, 1], got {delta}")));
    }
    Ok(retain_unless(rules, |conf, general| {
        general
            .iter()
            .any(|&g| g >= conf - delta - CONFIDENCE_EPS && g < conf - CONFIDENCE_EPS)
    }))
}

/// Keeps rules whose every item is whitelisted.
pub fn filter_allowed_values(rules: &[Rule], allowed: &AllowedValues) -> Vec<Rule> {
    rules
        .iter()
        .filter(|r| r.items.iter().all(|i| allowed.allows(i)))
        .cloned()
        .collect()
}

pub const STAGE_MINED: &str = "mined";
pub const STAGE_REDUNDANCY: &str = "redundancy";
pub const STAGE_CONFIDENCE_DIFF: &str = "confidence_diff";
pub const STAGE_ALLOWED_VALUES: &str = "allowed_values";

/// Redundancy prune, then the confidence-difference prune, then the whitelist
/// (skipped when `config.allowed` is `None`). Returns canonically sorted
/// survivors and the rule count entering and leaving each stage.
pub fn prune_cascade(rules: &[Rule], config: &PruneConfig) -> Result<(Vec<Rule>, Vec<StageCount>)> {
    let stage = |name: &str, count: usize| StageCount {
        stage: name.to_string(),
        count,
    };
    let mut counts = vec![stage(STAGE_MINED, rules.len())];
    let after_redundancy = prune_redundant(rules);
    counts.push(stage(STAGE_REDUNDANCY, after_redundancy.len()));
    let after_delta = prune_confidence_diff(&after_redundancy, config.delta)?;
    counts.push(stage(STAGE_CONFIDENCE_DIFF, after_delta.len()));
    let mut survivors = match &config.allowed {
        Some(allowed) => filter_allowed_values(&after_delta, allowed),
        None => after_delta,
    };
    counts.push(stage(STAGE_ALLOWED_VALUES, survivors.len()));
    sort_canonical(&mut survivors);
    Ok((survivors, counts))
}

/// Rules left by the confidence-difference prune for each threshold, the
/// curve used to pick `delta`. `rules` should already be redundancy-pruned.
pub fn delta_sweep(rules: &[Rule], deltas: &[f64]) -> Result<Vec<(f64, usize)>> {
    deltas
        .iter()
        .map(|&d| prune_confidence_diff(rules, d).map(|r| (d, r.len())))
        .collect()
}
