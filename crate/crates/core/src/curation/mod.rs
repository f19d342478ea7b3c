//! Designer-side refinement: interventions, keep/remove review, intervention
//! suggestions from annotated items, category weights, and reviewer agreement.

mod session;

pub use session::{
    CurationSession, CurationStats, ExportSummary, ItemPut, ItemView, RulePage, RulePatch,
    RuleQuery, RuleSort, RuleView, WeightsPut, WeightsView,
};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::data::Item;
use crate::error::{Error, Result};
use crate::miner::Rule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterventionTarget {
    /// Aimed directly at the interesting outcome value.
    Outcome,
    /// Aimed at one or more left-hand-side items, by item id.
    Items { items: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub id: String,
    pub text: String,
    pub target: InterventionTarget,
}

impl Intervention {
    pub fn outcome(id: impl Into<String>, text: impl Into<String>) -> Self {
        Intervention {
            id: id.into(),
            text: text.into(),
            target: InterventionTarget::Outcome,
        }
    }

    pub fn for_item(id: impl Into<String>, text: impl Into<String>, item: &Item) -> Self {
        Intervention {
            id: id.into(),
            text: text.into(),
            target: InterventionTarget::Items {
                items: vec![item.id()],
            },
        }
    }
}

/// Checks ids, texts, and that item-directed interventions point at `scope`.
pub(crate) fn validate_interventions(list: &[Intervention], scope: &BTreeSet<String>) -> Result<()> {
    let mut ids = HashSet::new();
    for iv in list {
        if iv.id.trim().is_empty() {
            return Err(Error::Invalid("intervention id must be nonempty".into()));
        }
        if iv.text.trim().is_empty() {
            return Err(Error::Invalid(format!("intervention `{}` has empty text", iv.id)));
        }
        if !ids.insert(iv.id.as_str()) {
            return Err(Error::Invalid(format!("intervention `{}` listed twice", iv.id)));
        }
        if let InterventionTarget::Items { items } = &iv.target {
            if items.is_empty() {
                return Err(Error::Invalid(format!("intervention `{}` targets no item", iv.id)));
            }
            if let Some(bad) = items.iter().find(|i| !scope.contains(*i)) {
                return Err(Error::Invalid(format!(
                    "intervention `{}` targets `{bad}`, which is not on the left-hand side",
                    iv.id
                )));
            }
        }
    }
    Ok(())
}

/// Interventions listed for one item, plus its diversification category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAnnotation {
    pub item: Item,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl ItemAnnotation {
    pub fn actionable(&self) -> bool {
        !self.interventions.is_empty()
    }
}

/// Item annotations keyed by item id.
pub type ItemAnnotations = BTreeMap<String, ItemAnnotation>;

pub fn index_items(items: &[ItemAnnotation]) -> ItemAnnotations {
    items.iter().map(|a| (a.item.id(), a.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleAnnotation {
    pub rule_id: String,
    pub kept: bool,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
    #[serde(default)]
    pub reviewer: String,
    #[serde(default)]
    pub version: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryWeights(pub BTreeMap<String, f64>);

impl CategoryWeights {
    pub fn validate(&self) -> Result<()> {
        for (category, w) in &self.0 {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::Invalid(format!(
                    "weight of category `{category}` must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.0.get(category).copied()
    }
}

/// Every intervention listed on any left-hand-side item of `rule`, deduplicated
/// by id in item order.
pub fn suggest_interventions(rule: &Rule, items: &ItemAnnotations) -> Vec<Intervention> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in &rule.items {
        let Some(annotation) = items.get(&item.id()) else { continue };
        for iv in &annotation.interventions {
            if seen.insert(iv.id.clone()) {
                out.push(iv.clone());
            }
        }
    }
    out
}

/// A rule in the final associative classifier. It is actionable exactly when
/// it carries at least one intervention.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierRule {
    pub rule: Rule,
    pub interventions: Vec<Intervention>,
}

impl ClassifierRule {
    pub fn unannotated(rule: Rule) -> Self {
        ClassifierRule {
            rule,
            interventions: Vec::new(),
        }
    }

    pub fn actionable(&self) -> bool {
        !self.interventions.is_empty()
    }
}

#[derive(Serialize)]
struct ClassifierRuleOut<'a> {
    #[serde(flatten)]
    rule: &'a Rule,
    interventions: &'a [Intervention],
    actionable: bool,
}

#[derive(Deserialize)]
struct ClassifierRuleIn {
    #[serde(flatten)]
    rule: Rule,
    #[serde(default)]
    interventions: Vec<Intervention>,
}

impl Serialize for ClassifierRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassifierRuleOut {
            rule: &self.rule,
            interventions: &self.interventions,
            actionable: self.actionable(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClassifierRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ClassifierRuleIn::deserialize(d)?;
        Ok(ClassifierRule {
            rule: repr.rule,
            interventions: repr.interventions,
        })
    }
}

/// The curated rule set used at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub interesting_values: Vec<String>,
    pub rules: Vec<ClassifierRule>,
    #[serde(default)]
    pub items: Vec<ItemAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_weights: Option<CategoryWeights>,
}

impl Classifier {
    /// Uncurated classifier: every rule kept, none actionable.
    pub fn from_rules(rules: Vec<Rule>, interesting_values: Vec<String>) -> Self {
        Classifier {
            interesting_values,
            rules: rules.into_iter().map(ClassifierRule::unannotated).collect(),
            items: Vec::new(),
            category_weights: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        canonical::read_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        canonical::write_json(path, self)
    }

    pub fn item_annotations(&self) -> ItemAnnotations {
        index_items(&self.items)
    }

    pub fn actionable_count(&self) -> usize {
        self.rules.iter().filter(|r| r.actionable()).count()
    }
}

/// Drops rules marked removed and attaches interventions. Rules without an
/// annotation are kept, with no interventions.
pub fn apply_annotations(
    rules: &[Rule],
    annotations: &BTreeMap<String, RuleAnnotation>,
) -> Result<Vec<ClassifierRule>> {
    let known: HashSet<&str> = rules.iter().map(|r| r.id.as_str()).collect();
    if let Some(unknown) = annotations.keys().find(|id| !known.contains(id.as_str())) {
        return Err(Error::NotFound(format!("annotation for unknown rule `{unknown}`")));
    }
    Ok(rules
        .iter()
        .filter_map(|rule| match annotations.get(&rule.id) {
            Some(a) if !a.kept => None,
            Some(a) => Some(ClassifierRule {
                rule: rule.clone(),
                interventions: a.interventions.clone(),
            }),
            None => Some(ClassifierRule::unannotated(rule.clone())),
        })
        .collect())
}

/// Two-rater Cohen's kappa over binary keep/remove judgments paired by rule id.
pub fn cohens_kappa(a: &BTreeMap<String, bool>, b: &BTreeMap<String, bool>) -> Result<f64> {
    if a.len() != b.len() || a.keys().any(|k| !b.contains_key(k)) {
        return Err(Error::Invalid("the two reviews cover different rules".into()));
    }
    if a.len() < 2 {
        return Err(Error::Invalid("kappa needs at least two ratings".into()));
    }
    let n = a.len() as f64;
    let mut agree = 0usize;
    let mut a_true = 0usize;
    let mut b_true = 0usize;
    for (key, &ra) in a {
        let rb = b[key];
        agree += usize::from(ra == rb);
        a_true += usize::from(ra);
        b_true += usize::from(rb);
    }
    let p_o = agree as f64 / n;
    let pa = a_true as f64 / n;
    let pb = b_true as f64 / n;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if p_e == 1.0 {
        // Both raters constant and identical.
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Bin;

    fn bmi_hi() -> Item {
        Item::range("bmi", Bin::new(35.0, f64::INFINITY).unwrap())
    }

    fn rule1() -> Rule {
        Rule::new(vec![bmi_hi(), Item::category("ace", "yes")], "dm2", 0.05, 0.7).unwrap()
    }

    #[test]
    fn suggestions_come_from_annotated_items() {
        let weight_loss = Intervention::for_item("wl", "enroll in a weight loss program", &bmi_hi());
        let items = index_items(&[ItemAnnotation {
            item: bmi_hi(),
            interventions: vec![weight_loss.clone()],
            category: None,
        }]);
        assert_eq!(suggest_interventions(&rule1(), &items), vec![weight_loss]);
        assert!(suggest_interventions(&rule1(), &ItemAnnotations::new()).is_empty());
    }

    #[test]
    fn suggestions_deduplicate_by_id() {
        let shared = Intervention::outcome("x", "screen annually");
        let items = index_items(&[
            ItemAnnotation {
                item: bmi_hi(),
                interventions: vec![shared.clone()],
                category: None,
            },
            ItemAnnotation {
                item: Item::category("ace", "yes"),
                interventions: vec![shared.clone()],
                category: None,
            },
        ]);
        assert_eq!(suggest_interventions(&rule1(), &items), vec![shared]);
    }

    #[test]
    fn apply_annotations_defaults_and_errors() {
        let r2 = Rule::new(vec![Item::category("ace", "yes")], "dm2", 0.1, 0.6).unwrap();
        let rules = vec![rule1(), r2.clone()];
        let mut ann = BTreeMap::new();
        ann.insert(
            r2.id.clone(),
            RuleAnnotation {
                rule_id: r2.id.clone(),
                kept: false,
                interventions: vec![],
                reviewer: "dr a".into(),
                version: 1,
            },
        );
        let out = apply_annotations(&rules, &ann).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rule, rule1());
        assert!(!out[0].actionable());
        assert_eq!(apply_annotations(&rules, &ann).unwrap(), out);

        ann.insert(
            "nope".into(),
            RuleAnnotation {
                rule_id: "nope".into(),
                kept: true,
                interventions: vec![],
                reviewer: String::new(),
                version: 0,
            },
        );
        assert!(matches!(apply_annotations(&rules, &ann), Err(Error::NotFound(_))));
    }

    #[test]
    fn actionable_count_matches_interventions() {
        // 415 kept rules of which 283 carry an intervention.
        let rules: Vec<Rule> = (0..415)
            .map(|i| Rule::new(vec![Item::category(format!("f{i:03}"), "1")], "v", 0.1, 0.6).unwrap())
            .collect();
        let ann: BTreeMap<String, RuleAnnotation> = rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let interventions = if i < 283 {
                    vec![Intervention::outcome("iv", "follow up")]
                } else {
                    vec![]
                };
                (
                    r.id.clone(),
                    RuleAnnotation {
                        rule_id: r.id.clone(),
                        kept: true,
                        interventions,
                        reviewer: "expert".into(),
                        version: 1,
                    },
                )
            })
            .collect();
        let out = apply_annotations(&rules, &ann).unwrap();
        assert_eq!(out.len(), 415);
        assert_eq!(out.iter().filter(|r| r.actionable()).count(), 283);
    }

    fn review(v: &[bool]) -> BTreeMap<String, bool> {
        v.iter().enumerate().map(|(i, &b)| (format!("r{i}"), b)).collect()
    }

    #[test]
    fn kappa_fixtures() {
        let a = review(&[true, true, false, false]);
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
        let b = review(&[false, false, true, true]);
        assert_eq!(cohens_kappa(&a, &b).unwrap(), -1.0);
        let a = review(&[true, true, true, false]);
        let b = review(&[true, true, false, false]);
        assert_eq!(cohens_kappa(&a, &b).unwrap(), 0.5);
        let constant = review(&[true, true, true]);
        assert_eq!(cohens_kappa(&constant, &constant).unwrap(), 1.0);
    }

    #[test]
    fn kappa_rejects_mismatched_keys() {
        let a = review(&[true, false]);
        let mut b = review(&[true, false]);
        b.insert("extra".into(), true);
        assert!(cohens_kappa(&a, &b).is_err());
        assert!(cohens_kappa(&review(&[true]), &review(&[true])).is_err());
    }

    #[test]
    fn classifier_rule_json_carries_derived_flag() {
        let cr = ClassifierRule {
            rule: rule1(),
            interventions: vec![Intervention::outcome("a", "b")],
        };
        let v = serde_json::to_value(&cr).unwrap();
        assert_eq!(v["actionable"], true);
        assert_eq!(v["id"], rule1().id);
        let back: ClassifierRule = serde_json::from_value(v).unwrap();
        assert_eq!(back, cr);
    }

    #[test]
    fn intervention_validation() {
        let scope: BTreeSet<String> = [bmi_hi().id()].into_iter().collect();
        let ok = vec![Intervention::for_item("wl", "weight loss", &bmi_hi())];
        validate_interventions(&ok, &scope).unwrap();
        let off_rule = vec![Intervention::for_item("x", "y", &Item::category("ace", "no"))];
        assert!(validate_interventions(&off_rule, &scope).is_err());
        let empty = vec![Intervention::outcome("x", " ")];
        assert!(validate_interventions(&empty, &scope).is_err());
        let dup = vec![Intervention::outcome("x", "a"), Intervention::outcome("x", "b")];
        assert!(validate_interventions(&dup, &scope).is_err());
    }
}
