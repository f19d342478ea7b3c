//! Class association rule mining restricted to interesting outcome values.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{bins_from_cuts, CutTable, Dataset, FeatureKind, Item, ItemMatcher, Schema};
use crate::error::{Error, Result};

/// Which count the minimum-support threshold is applied to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    /// Rows matching the left-hand side and carrying the class value.
    #[default]
    Joint,
    /// Rows matching the left-hand side, whatever their label.
    Lhs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_len: usize,
    pub model_features: BTreeSet<String>,
    pub interesting_values: BTreeSet<String>,
    #[serde(default)]
    pub support_mode: SupportMode,
}

impl MiningConfig {
    pub const DEFAULT_MIN_SUPPORT: f64 = 0.01;
    pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;
    pub const DEFAULT_MAX_LEN: usize = 4;

    /// Default thresholds, every schema feature, the schema's interesting values.
    pub fn for_schema(schema: &Schema) -> Self {
        MiningConfig {
            min_support: Self::DEFAULT_MIN_SUPPORT,
            min_confidence: Self::DEFAULT_MIN_CONFIDENCE,
            max_len: Self::DEFAULT_MAX_LEN,
            model_features: schema.features().iter().map(|f| f.name.clone()).collect(),
            interesting_values: schema.outcome().interesting_values.iter().cloned().collect(),
            support_mode: SupportMode::Joint,
        }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if !(self.min_support > 0.0
            && self.min_support <= self.min_confidence
            && self.min_confidence <= 1.0)
        {
            return Err(Error::Config(format!(
                "need 0 < min_support <= min_confidence <= 1, got {} and {}",
                self.min_support, self.min_confidence
            )));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be at least 1".into()));
        }
        if self.interesting_values.is_empty() {
            return Err(Error::Config("no interesting values to mine for".into()));
        }
        for v in &self.interesting_values {
            if schema.outcome().label_index(v).is_none() {
                return Err(Error::Config(format!("interesting value `{v}` is not a label value")));
            }
        }
        for f in &self.model_features {
            if schema.feature(f).is_none() {
                return Err(Error::Config(format!("model feature `{f}` is not in the schema")));
            }
        }
        Ok(())
    }
}

/// `p_1 ∧ … ∧ p_m → class_value` with its training support and confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleRepr")]
pub struct Rule {
    pub id: String,
    pub items: Vec<Item>,
    pub class_value: String,
    pub support: f64,
    pub confidence: f64,
}

#[derive(Deserialize)]
struct RuleRepr {
    #[serde(default)]
    id: Option<String>,
    items: Vec<Item>,
    class_value: String,
    support: f64,
    confidence: f64,
}

impl TryFrom<RuleRepr> for Rule {
    type Error = Error;

    fn try_from(repr: RuleRepr) -> Result<Self> {
        let rule = Rule::new(repr.items, repr.class_value, repr.support, repr.confidence)?;
        if let Some(id) = repr.id {
            if id != rule.id {
                return Err(Error::Invalid(format!(
                    "rule id `{id}` is not canonical; expected `{}`",
                    rule.id
                )));
            }
        }
        Ok(rule)
    }
}

/// `f1=w1&f2=w2→v` over items in canonical order.
pub fn rule_id(items: &[Item], class_value: &str) -> String {
    let mut id = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            id.push('&');
        }
        let _ = write!(id, "{item}");
    }
    id.push('→');
    id.push_str(class_value);
    id
}

impl Rule {
    pub fn new(
        mut items: Vec<Item>,
        class_value: impl Into<String>,
        support: f64,
        confidence: f64,
    ) -> Result<Self> {
        let class_value = class_value.into();
        if items.is_empty() {
            return Err(Error::Invalid("a rule needs at least one item".into()));
        }
        items.sort();
        if items.windows(2).any(|w| w[0].feature == w[1].feature) {
            return Err(Error::Invalid(format!(
                "rule → {class_value} uses a feature twice"
            )));
        }
        if !(0.0..=1.0).contains(&support) || !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Invalid("support and confidence must lie in [0, 1]".into()));
        }
        Ok(Rule {
            id: rule_id(&items, &class_value),
            items,
            class_value,
            support,
            confidence,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `bmi ≥ 35 AND ace_inhibitor = yes`
    pub fn render_lhs(&self) -> String {
        self.items
            .iter()
            .map(Item::render)
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}

/// Confidence descending, support descending, fewer items first, id ascending.
pub fn canonical_cmp(a: &Rule, b: &Rule) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| b.support.total_cmp(&a.support))
        .then_with(|| a.items.len().cmp(&b.items.len()))
        .then_with(|| a.id.cmp(&b.id))
}

pub fn sort_canonical(rules: &mut [Rule]) {
    rules.sort_by(canonical_cmp);
}

/// Items available to the miner: bins of continuous model features and
/// declared values of categorical ones, deduplicated and canonically ordered.
pub fn build_item_universe(
    schema: &Schema,
    cuts: &CutTable,
    config: &MiningConfig,
) -> Result<Vec<Item>> {
    let mut items = BTreeSet::new();
    for name in &config.model_features {
        let feature = schema
            .feature(name)
            .ok_or_else(|| Error::Config(format!("model feature `{name}` is not in the schema")))?;
        match feature.kind {
            FeatureKind::Categorical => {
                items.extend(feature.values.iter().map(|v| Item::category(name, v.as_str())));
            }
            FeatureKind::Continuous => {
                let feature_cuts = cuts.get(name).map(Vec::as_slice).unwrap_or(&[]);
                items.extend(bins_from_cuts(feature_cuts)?.into_iter().map(|b| Item::range(name, b)));
            }
        }
    }
    Ok(items.into_iter().collect())
}

type Bits = Vec<u64>;

fn row_bits(train: &Dataset, pred: impl Fn(usize) -> bool) -> Bits {
    let mut bits = vec![0u64; train.len().div_ceil(64)];
    for row in 0..train.len() {
        if pred(row) {
            bits[row / 64] |= 1 << (row % 64);
        }
    }
    bits
}

fn count_and(lhs: &[u64], item: &[u64], class: &[u64]) -> (u64, u64) {
    let mut covered = 0u64;
    let mut joint = 0u64;
    for ((a, b), c) in lhs.iter().zip(item).zip(class) {
        let w = a & b;
        covered += w.count_ones() as u64;
        joint += (w & c).count_ones() as u64;
    }
    (covered, joint)
}

struct Miner<'a> {
    items: &'a [Item],
    bits: &'a [Bits],
    /// First index after the run of items sharing this item's feature.
    next_feature: &'a [usize],
    class_bits: Bits,
    class_value: &'a str,
    n: f64,
    config: &'a MiningConfig,
}

impl Miner<'_> {
    fn frequent(&self, covered: u64, joint: u64) -> bool {
        let count = match self.config.support_mode {
            SupportMode::Joint => joint,
            SupportMode::Lhs => covered,
        };
        count > 0 && count as f64 / self.n >= self.config.min_support
    }

    fn emit(&self, prefix: &[usize], covered: u64, joint: u64, out: &mut Vec<Rule>) {
        if joint == 0 {
            return;
        }
        let confidence = joint as f64 / covered as f64;
        if confidence >= self.config.min_confidence {
            let items = prefix.iter().map(|&i| self.items[i].clone()).collect();
            let rule = Rule::new(items, self.class_value, joint as f64 / self.n, confidence)
                .expect("candidate generation keeps one item per feature");
            out.push(rule);
        }
    }

    /// Depth-first extension of `prefix` (whose bitset is `lhs`) by items of
    /// later features. Infrequent nodes are not extended: the pruned count
    /// can only shrink as items are added.
    fn extend(&self, prefix: &mut Vec<usize>, lhs: &[u64], out: &mut Vec<Rule>) {
        let start = prefix.last().map_or(0, |&last| self.next_feature[last]);
        for j in start..self.items.len() {
            let (covered, joint) = count_and(lhs, &self.bits[j], &self.class_bits);
            if !self.frequent(covered, joint) {
                continue;
            }
            prefix.push(j);
            self.emit(prefix, covered, joint, out);
            if prefix.len() < self.config.max_len {
                let child: Bits = lhs.iter().zip(&self.bits[j]).map(|(a, b)| a & b).collect();
                self.extend(prefix, &child, out);
            }
            prefix.pop();
        }
    }

    fn run(&self) -> Vec<Rule> {
        (0..self.items.len())
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut out = Vec::new();
                let (covered, joint) =
                    count_and(&self.bits[first], &self.bits[first], &self.class_bits);
                if self.frequent(covered, joint) {
                    let mut prefix = vec![first];
                    self.emit(&prefix, covered, joint, &mut out);
                    if self.config.max_len > 1 {
                        self.extend(&mut prefix, &self.bits[first], &mut out);
                    }
                }
                out
            })
            .collect()
    }
}

/// Enumerates every rule over `items` that satisfies the thresholds in `config`.
///
/// Support is the fraction of all training rows matching the left-hand side
/// with the class value; confidence is that count over the left-hand-side
/// count. The output is canonically sorted and does not depend on the number
/// of worker threads.
pub fn mine(train: &Dataset, items: &[Item], config: &MiningConfig) -> Result<Vec<Rule>> {
    config.validate(&train.schema)?;
    if train.is_empty() {
        return Err(Error::Invalid("cannot mine an empty training set".into()));
    }
    if items.is_empty() {
        return Err(Error::Invalid("the item universe is empty".into()));
    }
    let mut items: Vec<Item> = items.to_vec();
    items.sort();
    items.dedup();

    let matchers: Vec<ItemMatcher> = items
        .iter()
        .map(|it| train.schema.compile_item(it))
        .collect::<Result<_>>()?;
    let bits: Vec<Bits> = matchers
        .par_iter()
        .map(|m| row_bits(train, |row| m.matches(&train.instances[row])))
        .collect();
    let mut next_feature = vec![items.len(); items.len()];
    for i in (0..items.len()).rev() {
        if i + 1 < items.len() {
            next_feature[i] = if items[i + 1].feature == items[i].feature {
                next_feature[i + 1]
            } else {
                i + 1
            };
        }
    }

    let outcome = train.schema.outcome();
    let mut rules = Vec::new();
    for (label_idx, class_value) in outcome.label_values.iter().enumerate() {
        if !config.interesting_values.contains(class_value) {
            continue;
        }
        let miner = Miner {
            items: &items,
            bits: &bits,
            next_feature: &next_feature,
            class_bits: row_bits(train, |row| train.instances[row].label == label_idx),
            class_value,
            n: train.len() as f64,
            config,
        };
        rules.extend(miner.run());
    }
    sort_canonical(&mut rules);
    Ok(rules)
}

/// Exact support and confidence of `lhs → class_value` on `train`.
pub fn count_rule(train: &Dataset, lhs: &[Item], class_value: &str) -> Result<(f64, f64)> {
    let features: HashSet<&str> = lhs.iter().map(|i| i.feature.as_str()).collect();
    if features.len() != lhs.len() {
        return Err(Error::Invalid("left-hand side uses a feature twice".into()));
    }
    let label = train
        .schema
        .outcome()
        .label_index(class_value)
        .ok_or_else(|| Error::Invalid(format!("unknown class value `{class_value}`")))?;
    let matchers: Vec<ItemMatcher> = lhs
        .iter()
        .map(|it| train.schema.compile_item(it))
        .collect::<Result<_>>()?;
    let mut covered = 0usize;
    let mut joint = 0usize;
    for inst in &train.instances {
        if matchers.iter().all(|m| m.matches(inst)) {
            covered += 1;
            if inst.label == label {
                joint += 1;
            }
        }
    }
    if covered == 0 {
        return Err(Error::NoCoverage);
    }
    Ok((joint as f64 / train.len() as f64, joint as f64 / covered as f64))
}
