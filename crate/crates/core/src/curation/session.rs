use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    apply_annotations, suggest_interventions, validate_interventions, CategoryWeights, Classifier,
    Intervention, ItemAnnotation, ItemAnnotations, RuleAnnotation,
};
use crate::canonical;
use crate::data::Item;
use crate::error::{Error, Result};
use crate::miner::Rule;
use crate::pruner::StageCount;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredItem {
    #[serde(flatten)]
    annotation: ItemAnnotation,
    version: u64,
}

#[derive(Serialize, Deserialize)]
struct SessionDoc {
    rules: Vec<Rule>,
    interesting_values: Vec<String>,
    #[serde(default)]
    stage_counts: Vec<StageCount>,
    #[serde(default)]
    annotations: BTreeMap<String, RuleAnnotation>,
    #[serde(default)]
    items: BTreeMap<String, StoredItem>,
    #[serde(default)]
    category_weights: CategoryWeights,
    #[serde(default)]
    weights_version: u64,
}

/// One review session: the pruned rules plus every annotation made on them.
///
/// All mutations carry the version the caller read and fail with
/// [`Error::Conflict`] when it is stale. Versions start at 0 for entries
/// nobody has touched and increase by one per accepted mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurationSession {
    rules: Vec<Rule>,
    rule_pos: BTreeMap<String, usize>,
    universe: BTreeMap<String, Item>,
    interesting_values: Vec<String>,
    stage_counts: Vec<StageCount>,
    annotations: BTreeMap<String, RuleAnnotation>,
    items: BTreeMap<String, StoredItem>,
    category_weights: CategoryWeights,
    weights_version: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RulePatch {
    #[serde(default)]
    pub kept: Option<bool>,
    #[serde(default)]
    pub interventions: Option<Vec<Intervention>>,
    #[serde(default)]
    pub reviewer: Option<String>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPut {
    #[serde(default)]
    pub interventions: Vec<Intervention>,
    #[serde(default)]
    pub category: Option<String>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsPut {
    pub weights: CategoryWeights,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsView {
    pub weights: CategoryWeights,
    pub version: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSort {
    /// Confidence desc, support desc, shorter first, id.
    #[default]
    Canonical,
    ConfidenceDesc,
    ConfidenceAsc,
    SupportDesc,
    SupportAsc,
    Id,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleQuery {
    #[serde(default)]
    pub actionable: Option<bool>,
    #[serde(default)]
    pub kept: Option<bool>,
    #[serde(default)]
    pub reviewed: Option<bool>,
    /// Only rules with an item on this feature.
    #[serde(default)]
    pub feature: Option<String>,
    #[serde(default)]
    pub sort: Option<RuleSort>,
    /// 1-based.
    #[serde(default)]
    pub page: Option<usize>,
    #[serde(default)]
    pub per_page: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleView {
    pub id: String,
    pub items: Vec<Item>,
    pub lhs: String,
    pub class_value: String,
    pub support: f64,
    pub confidence: f64,
    pub kept: bool,
    pub reviewed: bool,
    pub reviewer: String,
    pub interventions: Vec<Intervention>,
    pub actionable: bool,
    pub suggestions: Vec<Intervention>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulePage {
    pub total: usize,
    pub page: usize,
    pub per_page: usize,
    pub rules: Vec<RuleView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemView {
    pub item_id: String,
    pub item: Item,
    pub rendered: String,
    pub interventions: Vec<Intervention>,
    pub category: Option<String>,
    pub actionable: bool,
    /// Rules in the session that contain this item.
    pub rule_count: usize,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationStats {
    pub stage_counts: Vec<StageCount>,
    pub total_rules: usize,
    pub kept: usize,
    pub removed: usize,
    pub actionable: usize,
    pub reviewed: usize,
    pub unreviewed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub rules: usize,
    pub actionable: usize,
    pub removed: usize,
    pub unreviewed: usize,
}

pub const DEFAULT_PER_PAGE: usize = 50;
pub const MAX_PER_PAGE: usize = 1000;

fn check_version(key: &str, expected: u64, current: u64) -> Result<()> {
    if expected != current {
        return Err(Error::Conflict {
            key: key.to_string(),
            expected,
            current,
        });
    }
    Ok(())
}

impl CurationSession {
    pub fn new(
        rules: Vec<Rule>,
        interesting_values: Vec<String>,
        stage_counts: Vec<StageCount>,
    ) -> Result<Self> {
        Self::assemble(SessionDoc {
            rules,
            interesting_values,
            stage_counts,
            annotations: BTreeMap::new(),
            items: BTreeMap::new(),
            category_weights: CategoryWeights::default(),
            weights_version: 0,
        })
    }

    fn assemble(doc: SessionDoc) -> Result<Self> {
        let mut rule_pos = BTreeMap::new();
        let mut universe = BTreeMap::new();
        for (pos, rule) in doc.rules.iter().enumerate() {
            if rule_pos.insert(rule.id.clone(), pos).is_some() {
                return Err(Error::Invalid(format!("rule `{}` appears twice", rule.id)));
            }
            for item in &rule.items {
                universe.entry(item.id()).or_insert_with(|| item.clone());
            }
        }
        for (id, ann) in &doc.annotations {
            if !rule_pos.contains_key(id) || ann.rule_id != *id {
                return Err(Error::Invalid(format!("annotation for unknown rule `{id}`")));
            }
        }
        for (id, stored) in &doc.items {
            if stored.annotation.item.id() != *id {
                return Err(Error::Invalid(format!("item annotation key `{id}` does not match its item")));
            }
            universe.entry(id.clone()).or_insert_with(|| stored.annotation.item.clone());
        }
        doc.category_weights.validate()?;
        Ok(CurationSession {
            rules: doc.rules,
            rule_pos,
            universe,
            interesting_values: doc.interesting_values,
            stage_counts: doc.stage_counts,
            annotations: doc.annotations,
            items: doc.items,
            category_weights: doc.category_weights,
            weights_version: doc.weights_version,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::assemble(canonical::read_json(path)?)
    }

    /// Persists the whole session atomically (temp file, then rename).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let doc = SessionDoc {
            rules: self.rules.clone(),
            interesting_values: self.interesting_values.clone(),
            stage_counts: self.stage_counts.clone(),
            annotations: self.annotations.clone(),
            items: self.items.clone(),
            category_weights: self.category_weights.clone(),
            weights_version: self.weights_version,
        };
        canonical::write_json(path, &doc)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn item_annotations(&self) -> ItemAnnotations {
        self.items
            .iter()
            .map(|(id, s)| (id.clone(), s.annotation.clone()))
            .collect()
    }

    fn rule(&self, id: &str) -> Result<&Rule> {
        self.rule_pos
            .get(id)
            .map(|&p| &self.rules[p])
            .ok_or_else(|| Error::NotFound(format!("rule `{id}`")))
    }

    fn view(&self, rule: &Rule, items: &ItemAnnotations) -> RuleView {
        let ann = self.annotations.get(&rule.id);
        let interventions = ann.map(|a| a.interventions.clone()).unwrap_or_default();
        RuleView {
            id: rule.id.clone(),
            items: rule.items.clone(),
            lhs: rule.render_lhs(),
            class_value: rule.class_value.clone(),
            support: rule.support,
            confidence: rule.confidence,
            kept: ann.is_none_or(|a| a.kept),
            reviewed: ann.is_some(),
            reviewer: ann.map(|a| a.reviewer.clone()).unwrap_or_default(),
            actionable: !interventions.is_empty(),
            interventions,
            suggestions: suggest_interventions(rule, items),
            version: ann.map_or(0, |a| a.version),
        }
    }

    pub fn rule_view(&self, id: &str) -> Result<RuleView> {
        let rule = self.rule(id)?;
        Ok(self.view(rule, &self.item_annotations()))
    }

    pub fn list_rules(&self, query: &RuleQuery) -> Result<RulePage> {
        let page = query.page.unwrap_or(1);
        let per_page = query.per_page.unwrap_or(DEFAULT_PER_PAGE);
        if page == 0 || per_page == 0 || per_page > MAX_PER_PAGE {
            return Err(Error::Invalid(format!(
                "page must be >= 1 and per_page in 1..={MAX_PER_PAGE}"
            )));
        }
        let items = self.item_annotations();
        let mut views: Vec<RuleView> = self
            .rules
            .iter()
            .filter(|r| {
                query
                    .feature
                    .as_ref()
                    .is_none_or(|f| r.items.iter().any(|i| &i.feature == f))
            })
            .map(|r| self.view(r, &items))
            .filter(|v| query.actionable.is_none_or(|a| v.actionable == a))
            .filter(|v| query.kept.is_none_or(|k| v.kept == k))
            .filter(|v| query.reviewed.is_none_or(|r| v.reviewed == r))
            .collect();
        let canonical = |a: &RuleView, b: &RuleView| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| b.support.total_cmp(&a.support))
                .then_with(|| a.items.len().cmp(&b.items.len()))
                .then_with(|| a.id.cmp(&b.id))
        };
        match query.sort.unwrap_or_default() {
            RuleSort::Canonical | RuleSort::ConfidenceDesc => views.sort_by(canonical),
            RuleSort::ConfidenceAsc => views.sort_by(|a, b| {
                a.confidence.total_cmp(&b.confidence).then_with(|| a.id.cmp(&b.id))
            }),
            RuleSort::SupportDesc => views.sort_by(|a, b| {
                b.support.total_cmp(&a.support).then_with(|| a.id.cmp(&b.id))
            }),
            RuleSort::SupportAsc => views.sort_by(|a, b| {
                a.support.total_cmp(&b.support).then_with(|| a.id.cmp(&b.id))
            }),
            RuleSort::Id => views.sort_by(|a, b| a.id.cmp(&b.id)),
        }
        let total = views.len();
        let rules = views
            .into_iter()
            .skip((page - 1) * per_page)
            .take(per_page)
            .collect();
        Ok(RulePage {
            total,
            page,
            per_page,
            rules,
        })
    }

    pub fn patch_rule(&mut self, id: &str, patch: RulePatch) -> Result<RuleView> {
        let rule = self.rule(id)?.clone();
        let current = self.annotations.get(id).map_or(0, |a| a.version);
        check_version(id, patch.version, current)?;
        if let Some(list) = &patch.interventions {
            let scope: BTreeSet<String> = rule.items.iter().map(Item::id).collect();
            validate_interventions(list, &scope)?;
        }
        let ann = self
            .annotations
            .entry(id.to_string())
            .or_insert_with(|| RuleAnnotation {
                rule_id: id.to_string(),
                kept: true,
                interventions: Vec::new(),
                reviewer: String::new(),
                version: 0,
            });
        if let Some(kept) = patch.kept {
            ann.kept = kept;
        }
        if let Some(list) = patch.interventions {
            ann.interventions = list;
        }
        if let Some(reviewer) = patch.reviewer {
            ann.reviewer = reviewer;
        }
        ann.version += 1;
        Ok(self.view(&rule, &self.item_annotations()))
    }

    fn item_view(&self, id: &str, item: &Item) -> ItemView {
        let stored = self.items.get(id);
        let interventions = stored
            .map(|s| s.annotation.interventions.clone())
            .unwrap_or_default();
        ItemView {
            item_id: id.to_string(),
            item: item.clone(),
            rendered: item.render(),
            actionable: !interventions.is_empty(),
            interventions,
            category: stored.and_then(|s| s.annotation.category.clone()),
            rule_count: self.rules.iter().filter(|r| r.items.contains(item)).count(),
            version: stored.map_or(0, |s| s.version),
        }
    }

    /// Every item appearing in a session rule, in canonical order.
    pub fn item_views(&self) -> Vec<ItemView> {
        let mut items: Vec<(&String, &Item)> = self.universe.iter().collect();
        items.sort_by(|a, b| a.1.cmp(b.1));
        items
            .into_iter()
            .map(|(id, item)| self.item_view(id, item))
            .collect()
    }

    pub fn put_item(&mut self, item_id: &str, put: ItemPut) -> Result<ItemView> {
        let item = self
            .universe
            .get(item_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("item `{item_id}`")))?;
        let current = self.items.get(item_id).map_or(0, |s| s.version);
        check_version(item_id, put.version, current)?;
        let scope: BTreeSet<String> = [item_id.to_string()].into_iter().collect();
        validate_interventions(&put.interventions, &scope)?;
        if matches!(&put.category, Some(c) if c.trim().is_empty()) {
            return Err(Error::Invalid("category must be nonempty when given".into()));
        }
        self.items.insert(
            item_id.to_string(),
            StoredItem {
                annotation: ItemAnnotation {
                    item: item.clone(),
                    interventions: put.interventions,
                    category: put.category,
                },
                version: current + 1,
            },
        );
        Ok(self.item_view(item_id, &item))
    }

    pub fn weights(&self) -> WeightsView {
        WeightsView {
            weights: self.category_weights.clone(),
            version: self.weights_version,
        }
    }

    pub fn put_weights(&mut self, put: WeightsPut) -> Result<WeightsView> {
        check_version("category-weights", put.version, self.weights_version)?;
        put.weights.validate()?;
        self.category_weights = put.weights;
        self.weights_version += 1;
        Ok(self.weights())
    }

    pub fn stats(&self) -> CurationStats {
        let removed = self.annotations.values().filter(|a| !a.kept).count();
        let actionable = self
            .annotations
            .values()
            .filter(|a| a.kept && !a.interventions.is_empty())
            .count();
        CurationStats {
            stage_counts: self.stage_counts.clone(),
            total_rules: self.rules.len(),
            kept: self.rules.len() - removed,
            removed,
            actionable,
            reviewed: self.annotations.len(),
            unreviewed: self.rules.len() - self.annotations.len(),
        }
    }

    /// Builds the final classifier from the current annotations.
    pub fn export(&self) -> Result<(Classifier, ExportSummary)> {
        let rules = apply_annotations(&self.rules, &self.annotations)?;
        let items: Vec<ItemAnnotation> = self
            .items
            .values()
            .map(|s| s.annotation.clone())
            .filter(|a| a.actionable() || a.category.is_some())
            .collect();
        let weights = (!self.category_weights.0.is_empty()).then(|| self.category_weights.clone());
        let classifier = Classifier {
            interesting_values: self.interesting_values.clone(),
            rules,
            items,
            category_weights: weights,
        };
        let stats = self.stats();
        let summary = ExportSummary {
            rules: classifier.rules.len(),
            actionable: classifier.actionable_count(),
            removed: stats.removed,
            unreviewed: stats.unreviewed,
        };
        Ok((classifier, summary))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Bin;

    fn bmi_hi() -> Item {
        Item::range("bmi", Bin::new(35.0, f64::INFINITY).unwrap())
    }

    fn session() -> CurationSession {
        let rules = vec![
            Rule::new(vec![bmi_hi(), Item::category("ace", "yes")], "dm2", 0.05, 0.8).unwrap(),
            Rule::new(vec![Item::category("ace", "yes")], "dm2", 0.1, 0.6).unwrap(),
            Rule::new(vec![Item::category("smoker", "yes")], "dm2", 0.2, 0.7).unwrap(),
        ];
        CurationSession::new(rules, vec!["dm2".into()], vec![]).unwrap()
    }

    #[test]
    fn patch_requires_current_version() {
        let mut s = session();
        let id = s.rules()[1].id.clone();
        let v = s
            .patch_rule(&id, RulePatch { kept: Some(false), version: 0, ..Default::default() })
            .unwrap();
        assert_eq!(v.version, 1);
        assert!(!v.kept);
        let err = s
            .patch_rule(&id, RulePatch { kept: Some(true), version: 0, ..Default::default() })
            .unwrap_err();
        assert!(matches!(err, Error::Conflict { current: 1, .. }));
        assert!(matches!(
            s.patch_rule("missing", RulePatch::default()),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn item_interventions_become_suggestions() {
        let mut s = session();
        let wl = Intervention::for_item("wl", "weight loss program", &bmi_hi());
        s.put_item(
            &bmi_hi().id(),
            ItemPut { interventions: vec![wl.clone()], category: Some("weight".into()), version: 0 },
        )
        .unwrap();
        let with_bmi = s.rule_view(&s.rules()[0].id).unwrap();
        assert_eq!(with_bmi.suggestions, vec![wl]);
        assert!(!with_bmi.actionable, "suggestions are not attached automatically");
        let without = s.rule_view(&s.rules()[2].id).unwrap();
        assert!(without.suggestions.is_empty());
        assert!(s
            .put_item("bmi=[0,1)", ItemPut { interventions: vec![], category: None, version: 0 })
            .is_err());
    }

    #[test]
    fn filters_paging_and_stats() {
        let mut s = session();
        let id = s.rules()[2].id.clone();
        s.patch_rule(
            &id,
            RulePatch {
                interventions: Some(vec![Intervention::outcome("quit", "smoking cessation")]),
                version: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let page = s
            .list_rules(&RuleQuery { actionable: Some(true), ..Default::default() })
            .unwrap();
        assert_eq!(page.total, 1);
        assert_eq!(page.rules[0].id, id);
        let sorted = s
            .list_rules(&RuleQuery { sort: Some(RuleSort::ConfidenceDesc), ..Default::default() })
            .unwrap();
        let confs: Vec<f64> = sorted.rules.iter().map(|r| r.confidence).collect();
        assert!(confs.windows(2).all(|w| w[0] >= w[1]));
        let paged = s
            .list_rules(&RuleQuery { page: Some(2), per_page: Some(2), ..Default::default() })
            .unwrap();
        assert_eq!(paged.rules.len(), 1);
        let by_feature = s
            .list_rules(&RuleQuery { feature: Some("ace".into()), ..Default::default() })
            .unwrap();
        assert_eq!(by_feature.total, 2);

        let stats = s.stats();
        assert_eq!((stats.actionable, stats.reviewed, stats.unreviewed), (1, 1, 2));
        let (classifier, summary) = s.export().unwrap();
        assert_eq!(classifier.rules.len(), 3);
        assert_eq!(summary.unreviewed, 2);
        assert_eq!(summary.actionable, 1);
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.json");
        let mut s = session();
        s.put_weights(WeightsPut {
            weights: CategoryWeights([("weight".to_string(), 2.0)].into_iter().collect()),
            version: 0,
        })
        .unwrap();
        s.put_item(
            &bmi_hi().id(),
            ItemPut { interventions: vec![], category: Some("weight".into()), version: 0 },
        )
        .unwrap();
        s.save(&path).unwrap();
        let back = CurationSession::load(&path).unwrap();
        assert_eq!(back, s);
        assert!(s
            .put_weights(WeightsPut {
                weights: CategoryWeights([("w".to_string(), -1.0)].into_iter().collect()),
                version: 1,
            })
            .is_err());
    }
}
