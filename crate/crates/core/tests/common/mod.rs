//! Independent reference implementations and seeded fixture generators shared
//! by the property tests and the acceptance target. Nothing here calls the
//! library routine it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rulelens_core::curation::{ClassifierRule, ItemAnnotations};
use rulelens_core::data::{
    Bin, Dataset, FeatureKind, FeatureSchema, Instance, Item, ItemValue, OutcomeSpec, Schema, Value,
};
use rulelens_core::miner::{rule_id, MiningConfig, Rule, SupportMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Item matching and direct counting

pub fn item_holds(schema: &Schema, inst: &Instance, item: &Item) -> bool {
    let f = schema
        .features()
        .iter()
        .position(|f| f.name == item.feature)
        .expect("item feature in schema");
    let feature = &schema.features()[f];
    match (&inst.values[f], &item.value) {
        (Value::Category(c), ItemValue::Category(v)) => feature.values[*c as usize] == *v,
        (Value::Number(x), ItemValue::Range(bin)) => bin.lo() <= *x && *x < bin.hi(),
        _ => false,
    }
}

pub fn lhs_holds(schema: &Schema, inst: &Instance, items: &[Item]) -> bool {
    items.iter().all(|i| item_holds(schema, inst, i))
}

/// (rows matching the items, rows matching the items with `class`)
pub fn direct_counts(ds: &Dataset, items: &[Item], class: &str) -> (usize, usize) {
    let outcome = ds.schema.outcome();
    let mut lhs = 0;
    let mut joint = 0;
    for inst in &ds.instances {
        if lhs_holds(&ds.schema, inst, items) {
            lhs += 1;
            if outcome.label_values[inst.label] == class {
                joint += 1;
            }
        }
    }
    (lhs, joint)
}

// ---------------------------------------------------------------------------
// Miner reference: enumerate every subset of the universe.

pub fn brute_force_mine(ds: &Dataset, items: &[Item], config: &MiningConfig) -> BTreeMap<String, (f64, f64)> {
    assert!(items.len() <= 16, "enumeration is exponential");
    let n = ds.len() as f64;
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << items.len()) {
        let subset: Vec<Item> = (0..items.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| items[i].clone())
            .collect();
        if subset.len() > config.max_len {
            continue;
        }
        let features: BTreeSet<&str> = subset.iter().map(|i| i.feature.as_str()).collect();
        if features.len() != subset.len() {
            continue;
        }
        if !subset.iter().all(|i| config.model_features.contains(&i.feature)) {
            continue;
        }
        let mut sorted = subset.clone();
        sorted.sort();
        for class in &config.interesting_values {
            let (lhs, joint) = direct_counts(ds, &sorted, class);
            if joint == 0 {
                continue;
            }
            let counted = match config.support_mode {
                SupportMode::Joint => joint,
                SupportMode::Lhs => lhs,
            };
            let confidence = joint as f64 / lhs as f64;
            if counted as f64 / n >= config.min_support && confidence >= config.min_confidence {
                out.insert(rule_id(&sorted, class), (joint as f64 / n, confidence));
            }
        }
    }
    out
}

/// A random dataset whose item universe has at most `max_items` items.
pub struct RandomCase {
    pub dataset: Dataset,
    pub items: Vec<Item>,
    pub config: MiningConfig,
}

pub fn random_mining_case(seed: u64, max_rows: usize, max_items: usize) -> RandomCase {
    let mut rng = rng(seed);
    let rows = rng.gen_range(20..=max_rows);
    let mut features = Vec::new();
    let mut items = Vec::new();
    let mut f = 0;
    while items.len() + 2 <= max_items && f < 5 {
        let name = format!("x{f}");
        let room = max_items - items.len();
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(2..=room.min(3));
            let values: Vec<&str> = ["p", "q", "r"][..k].to_vec();
            items.extend(values.iter().map(|v| Item::category(&name, *v)));
            features.push(FeatureSchema::categorical(&name, &values));
        } else {
            let n_cuts = rng.gen_range(1..=(room - 1).min(2));
            let mut cuts: Vec<f64> = (0..n_cuts).map(|_| rng.gen_range(1..10) as f64 - 0.5).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![f64::NEG_INFINITY];
            edges.extend(&cuts);
            edges.push(f64::INFINITY);
            items.extend(edges.windows(2).map(|w| Item::range(&name, Bin::new(w[0], w[1]).unwrap())));
            features.push(FeatureSchema::continuous(&name));
        }
        f += 1;
    }
    let n_labels = rng.gen_range(2..=3);
    let labels: Vec<String> = ["yes", "no", "maybe"][..n_labels].iter().map(|s| s.to_string()).collect();
    let interesting: Vec<String> = if n_labels == 3 && rng.gen_bool(0.5) {
        labels[..2].to_vec()
    } else {
        labels[..1].to_vec()
    };
    let schema = Schema::new(
        features,
        OutcomeSpec {
            label_values: labels.clone(),
            interesting_values: interesting.clone(),
            continuous_threshold: None,
        },
    )
    .unwrap();
    let instances = (0..rows)
        .map(|r| {
            let values: Vec<Value> = schema
                .features()
                .iter()
                .map(|feat| {
                    if rng.gen_bool(0.05) {
                        return Value::Missing;
                    }
                    match feat.kind {
                        FeatureKind::Categorical => {
                            Value::Category(rng.gen_range(0..feat.values.len() as u32))
                        }
                        FeatureKind::Continuous => Value::Number(rng.gen_range(0..10) as f64),
                    }
                })
                .collect();
            // Mild dependence on the first feature so rules have real confidence.
            let bias = match values.first() {
                Some(Value::Category(0)) => true,
                Some(Value::Number(x)) => *x < 5.0,
                _ => false,
            };
            let label = if bias && rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..n_labels) };
            Instance { id: format!("r{r}"), values, label }
        })
        .collect();
    let dataset = Dataset::new(schema, instances).unwrap();

    let names: Vec<String> = dataset.schema.features().iter().map(|f| f.name.clone()).collect();
    let mut model_features: BTreeSet<String> = names.iter().filter(|_| rng.gen_bool(0.8)).cloned().collect();
    if model_features.is_empty() {
        model_features.insert(names[0].clone());
    }
    let min_support: f64 = rng.gen_range(0.01..0.15);
    let min_confidence = rng.gen_range(min_support.max(0.2)..0.9);
    let config = MiningConfig {
        min_support,
        min_confidence,
        max_len: rng.gen_range(1..=4),
        model_features: model_features.clone(),
        interesting_values: interesting.into_iter().collect(),
        support_mode: if rng.gen_bool(0.8) { SupportMode::Joint } else { SupportMode::Lhs },
    };
    let items = items
        .into_iter()
        .filter(|i| model_features.contains(&i.feature))
        .collect();
    RandomCase { dataset, items, config }
}

// ---------------------------------------------------------------------------
// MDLP reference

pub fn entropy_of(labels: &[u32]) -> f64 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn distinct_classes(labels: &[u32]) -> usize {
    labels.iter().collect::<BTreeSet<_>>().len()
}

pub struct CutCheck {
    pub gain: f64,
    pub threshold: f64,
}

/// Information gain of splitting `points` at `cut` and the minimum
/// description length bound that gain must exceed.
pub fn evaluate_cut(points: &[(f64, u32)], cut: f64) -> CutCheck {
    let all: Vec<u32> = points.iter().map(|p| p.1).collect();
    let left: Vec<u32> = points.iter().filter(|p| p.0 < cut).map(|p| p.1).collect();
    let right: Vec<u32> = points.iter().filter(|p| p.0 >= cut).map(|p| p.1).collect();
    let n = all.len() as f64;
    let (h, h1, h2) = (entropy_of(&all), entropy_of(&left), entropy_of(&right));
    let gain = h - left.len() as f64 / n * h1 - right.len() as f64 / n * h2;
    let (k, k1, k2) = (
        distinct_classes(&all) as f64,
        distinct_classes(&left) as f64,
        distinct_classes(&right) as f64,
    );
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - k1 * h1 - k2 * h2);
    CutCheck { gain, threshold: ((n - 1.0).log2() + delta) / n }
}

/// Midpoints between adjacent distinct values, and whether each is a
/// boundary point (the two neighbouring values are not both pure in one class).
pub fn midpoints(points: &[(f64, u32)]) -> Vec<(f64, bool)> {
    let mut values: Vec<f64> = points.iter().map(|p| p.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let classes_at = |v: f64| -> BTreeSet<u32> {
        points.iter().filter(|p| p.0 == v).map(|p| p.1).collect()
    };
    values
        .windows(2)
        .map(|w| {
            let (a, b) = (classes_at(w[0]), classes_at(w[1]));
            let same_pure = a.len() == 1 && b.len() == 1 && a == b;
            ((w[0] + w[1]) / 2.0, !same_pure)
        })
        .collect()
}

/// Checks `cuts` against the recursive procedure they should come from.
/// Returns a description of the first violation.
pub fn check_mdlp(points: &[(f64, u32)], cuts: &[f64]) -> Result<(), String> {
    const TOL: f64 = 1e-12;
    let best = midpoints(points)
        .into_iter()
        .filter(|(_, boundary)| *boundary)
        .map(|(c, _)| (c, evaluate_cut(points, c)))
        .fold(None::<(f64, CutCheck)>, |acc, (c, chk)| match acc {
            Some((_, ref b)) if b.gain >= chk.gain => acc,
            _ => Some((c, chk)),
        });
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let inside: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
    if inside.len() != cuts.len() {
        return Err(format!("cuts {cuts:?} outside the segment [{lo}, {hi}]"));
    }
    if cuts.is_empty() {
        if let Some((c, chk)) = best {
            if chk.gain > chk.threshold + TOL {
                return Err(format!("cut {c} passes the stopping test but was not taken"));
            }
        }
        return Ok(());
    }
    let Some((_, best_chk)) = best else {
        return Err(format!("cuts {cuts:?} on a segment without boundary points"));
    };
    // The segment's first split is one of the cuts; find which makes the
    // remaining cuts a valid recursion on both halves.
    let mut reasons = Vec::new();
    for (i, &cut) in cuts.iter().enumerate() {
        let chk = evaluate_cut(points, cut);
        let boundary = midpoints(points).iter().any(|&(m, b)| b && m == cut);
        if !boundary {
            reasons.push(format!("{cut} is not a boundary midpoint"));
            continue;
        }
        if chk.gain < best_chk.gain - TOL {
            reasons.push(format!("{cut} gain {} below best {}", chk.gain, best_chk.gain));
            continue;
        }
        if chk.gain <= chk.threshold - TOL {
            reasons.push(format!("{cut} fails the stopping test"));
            continue;
        }
        let left: Vec<(f64, u32)> = points.iter().copied().filter(|p| p.0 < cut).collect();
        let right: Vec<(f64, u32)> = points.iter().copied().filter(|p| p.0 >= cut).collect();
        let l = check_mdlp(&left, &cuts[..i]);
        let r = check_mdlp(&right, &cuts[i + 1..]);
        match (l, r) {
            (Ok(()), Ok(())) => return Ok(()),
            (Err(e), _) | (_, Err(e)) => reasons.push(e),
        }
    }
    Err(reasons.join("; "))
}

/// A series of at most 100 points whose class tends to change with the value.
pub fn random_series(seed: u64) -> (Vec<Option<f64>>, Vec<u32>) {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=100);
    let classes = rng.gen_range(2..=3u32);
    let steps: Vec<f64> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0.0..50.0)).collect();
    let noise = rng.gen_range(0.0..0.4);
    let integer = rng.gen_bool(0.5);
    let mut values = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = if integer { rng.gen_range(0..50) as f64 } else { (rng.gen_range(0.0..50.0f64) * 100.0).round() / 100.0 };
        let region = steps.iter().filter(|&&s| x >= s).count() as u32;
        let label = if rng.gen_bool(noise) { rng.gen_range(0..classes) } else { region % classes };
        values.push(if rng.gen_bool(0.05) { None } else { Some(x) });
        labels.push(label);
    }
    (values, labels)
}

// ---------------------------------------------------------------------------
// Pruning reference

pub fn is_proper_subset(general: &Rule, specific: &Rule) -> bool {
    general.items.len() < specific.items.len() && general.items.iter().all(|i| specific.items.contains(i))
}

pub const EPS: f64 = 1e-10;

/// Rules with no same-class proper-subset rule of at least their confidence.
pub fn reference_redundant(rules: &[Rule]) -> BTreeSet<String> {
    rules
        .iter()
        .filter(|s| {
            !rules.iter().any(|g| {
                g.class_value == s.class_value && is_proper_subset(g, s) && g.confidence >= s.confidence - EPS
            })
        })
        .map(|r| r.id.clone())
        .collect()
}

/// Rules with no same-class proper-subset rule in `[conf − δ, conf)`.
pub fn reference_confidence_diff(rules: &[Rule], delta: f64) -> BTreeSet<String> {
    rules
        .iter()
        .filter(|s| {
            !rules.iter().any(|g| {
                g.class_value == s.class_value
                    && is_proper_subset(g, s)
                    && g.confidence >= s.confidence - delta - EPS
                    && g.confidence < s.confidence - EPS
            })
        })
        .map(|r| r.id.clone())
        .collect()
}

/// A random downward-closed-ish rule set over six binary features and two
/// classes, with confidences on a coarse grid so ties and exact-δ gaps occur.
pub fn random_rule_set(seed: u64, n: usize) -> Vec<Rule> {
    let mut rng = rng(seed);
    let mut by_id: BTreeMap<String, Rule> = BTreeMap::new();
    let mut attempts = 0;
    while by_id.len() < n && attempts < n * 20 {
        attempts += 1;
        let len = rng.gen_range(1..=4);
        let mut features: Vec<usize> = (0..6).collect();
        features.shuffle(&mut rng);
        let items: Vec<Item> = features[..len]
            .iter()
            .map(|f| Item::category(format!("g{f}"), if rng.gen_bool(0.5) { "1" } else { "0" }))
            .collect();
        let class = if rng.gen_bool(0.7) { "v" } else { "w" };
        let confidence = rng.gen_range(50..=100) as f64 / 100.0;
        let support = rng.gen_range(1..=20) as f64 / 100.0 * confidence;
        let rule = Rule::new(items, class, support, confidence).unwrap();
        by_id.entry(rule.id.clone()).or_insert(rule);
    }
    by_id.into_values().collect()
}

// ---------------------------------------------------------------------------
// Cutoff and ranking references

pub fn youden_sweep(scores: &[f64], labels: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut candidates = vec![distinct[0] - 1.0];
    for w in distinct.windows(2) {
        candidates.push((w[0] + w[1]) / 2.0);
    }
    candidates.push(distinct[distinct.len() - 1] + 1.0);
    let j = candidates.iter().map(|&t| youden_j(scores, labels, t)).collect();
    (candidates, j)
}

pub fn youden_j(scores: &[f64], labels: &[bool], t: f64) -> f64 {
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    let tp = scores.iter().zip(labels).filter(|(&s, &l)| l && s >= t).count() as f64;
    let tn = scores.iter().zip(labels).filter(|(&s, &l)| !l && s < t).count() as f64;
    tp / pos + tn / neg - 1.0
}

pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut doubled = 0u64;
    let mut pairs = 0u64;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1;
            doubled += if si > sj { 2 } else if si == sj { 1 } else { 0 };
        }
    }
    doubled as f64 / (2 * pairs) as f64
}

/// Seeded scores on a 0.001 grid with both classes present.
pub fn random_scores(seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=200);
    let signal = rng.gen_range(0.0..0.5);
    loop {
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            continue;
        }
        let scores = labels
            .iter()
            .map(|&l| {
                let base: f64 = rng.gen_range(0.0..1.0) + if l { signal } else { 0.0 };
                (base.min(1.0) * 1000.0).round() / 1000.0
            })
            .collect();
        return (scores, labels);
    }
}

// ---------------------------------------------------------------------------
// Coverage recount

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Recount {
    pub correct_positives: usize,
    pub explained: usize,
    pub explained_actionable: usize,
    pub positives: usize,
    pub positives_explainable: usize,
    pub rule_total: usize,
    pub actionable_total: usize,
    pub item_total: usize,
    pub rules_hist: BTreeMap<usize, usize>,
    pub actionable_hist: BTreeMap<usize, usize>,
    pub items_hist: BTreeMap<usize, usize>,
}

pub fn recount_coverage(
    test: &Dataset,
    predicted: &[String],
    rules: &[ClassifierRule],
    items: &ItemAnnotations,
) -> Recount {
    let outcome = test.schema.outcome();
    let mut r = Recount::default();
    for (inst, pred) in test.instances.iter().zip(predicted) {
        let label = &outcome.label_values[inst.label];
        let positive = outcome.interesting_values.contains(label);
        let applies = |class: &str| -> Vec<&ClassifierRule> {
            rules
                .iter()
                .filter(|cr| cr.rule.class_value == class && lhs_holds(&test.schema, inst, &cr.rule.items))
                .collect()
        };
        if positive {
            r.positives += 1;
            if !applies(label).is_empty() {
                r.positives_explainable += 1;
            }
        }
        if !(positive && pred == label) {
            continue;
        }
        r.correct_positives += 1;
        let matched = applies(pred);
        if matched.is_empty() {
            continue;
        }
        r.explained += 1;
        let actionable: Vec<_> = matched.iter().filter(|cr| !cr.interventions.is_empty()).collect();
        if !actionable.is_empty() {
            r.explained_actionable += 1;
        }
        let distinct: BTreeSet<String> = actionable
            .iter()
            .flat_map(|cr| cr.rule.items.iter())
            .filter(|i| items.get(&i.id()).is_some_and(|a| !a.interventions.is_empty()))
            .map(|i| i.id())
            .collect();
        r.rule_total += matched.len();
        r.actionable_total += actionable.len();
        r.item_total += distinct.len();
        *r.rules_hist.entry(matched.len()).or_default() += 1;
        *r.actionable_hist.entry(actionable.len()).or_default() += 1;
        *r.items_hist.entry(distinct.len()).or_default() += 1;
    }
    r
}

// ---------------------------------------------------------------------------
// Synthetic end-to-end run

use rulelens_core::curation::{suggest_interventions, Classifier, Intervention};
use rulelens_core::data::split_train_test;
use rulelens_core::discretize::discretize_dataset;
use rulelens_core::evaluator::{align_scores, positive_labels, predict, predicted_values, youden_cutoff};
use rulelens_core::miner::{build_item_universe, mine};
use rulelens_core::pruner::{prune_cascade, PruneConfig, StageCount};
use rulelens_core::synth::{generate, SynthConfig, SynthOutput};
use rulelens_core::data::CutTable;
use std::time::{Duration, Instant};

pub struct SyntheticRun {
    pub synth: SynthOutput,
    pub train: Dataset,
    pub test: Dataset,
    pub cuts: CutTable,
    pub mined: Vec<Rule>,
    pub survivors: Vec<Rule>,
    pub stage_counts: Vec<StageCount>,
    pub classifier: Classifier,
    pub threshold: f64,
    pub predicted: Vec<String>,
    pub elapsed: Duration,
}

/// Categorical items with value `a` on planted features get an item-level
/// intervention in one of two categories; every rule accepts all suggestions.
pub fn synthetic_annotations(synth: &SynthOutput) -> Vec<ItemAnnotation> {
    let schema = &synth.dataset.schema;
    synth
        .manifest
        .planted_features
        .iter()
        .filter_map(|name| {
            let f = schema.feature(name)?;
            (f.kind == FeatureKind::Categorical).then(|| {
                let item = Item::category(name, "a");
                ItemAnnotation {
                    interventions: vec![Intervention::for_item(format!("adjust-{name}"), format!("adjust {name}"), &item)],
                    category: Some(if name.ends_with('0') { "lifestyle".into() } else { "medication".into() }),
                    item,
                }
            })
        })
        .collect()
}

use rulelens_core::curation::ItemAnnotation;

pub fn synthetic_run(seed: u64) -> SyntheticRun {
    let start = Instant::now();
    let synth = generate(&SynthConfig { seed, ..Default::default() }).unwrap();
    let (train, test) = split_train_test(&synth.dataset, 0.8, seed).unwrap();
    let cuts = discretize_dataset(&train).unwrap();
    let mut config = MiningConfig::for_schema(&train.schema);
    config.model_features = synth.manifest.planted_features.iter().cloned().collect();
    let universe = build_item_universe(&train.schema, &cuts, &config).unwrap();
    let mined = mine(&train, &universe, &config).unwrap();
    let (survivors, stage_counts) = prune_cascade(&mined, &PruneConfig::default()).unwrap();

    let items = synthetic_annotations(&synth);
    let index: ItemAnnotations = items.iter().map(|a| (a.item.id(), a.clone())).collect();
    let mut classifier = Classifier::from_rules(survivors.clone(), train.schema.outcome().interesting_values.clone());
    for cr in &mut classifier.rules {
        cr.interventions = suggest_interventions(&cr.rule, &index);
    }
    classifier.items = items;

    let scores: crate::common::ScoreMap = synth.scores.iter().cloned().collect();
    let train_scores = align_scores(&train, &scores).unwrap();
    let threshold = youden_cutoff(&train_scores, &positive_labels(&train)).unwrap();
    let test_scores = align_scores(&test, &scores).unwrap();
    let predicted = predicted_values(&test, &predict(&test_scores, threshold)).unwrap();
    SyntheticRun {
        elapsed: start.elapsed(),
        synth,
        train,
        test,
        cuts,
        mined,
        survivors,
        stage_counts,
        classifier,
        threshold,
        predicted,
    }
}

pub type ScoreMap = BTreeMap<String, f64>;

/// Rows of `ds` satisfying `items`.
pub fn matched_rows(ds: &Dataset, items: &[Item]) -> BTreeSet<usize> {
    ds.instances
        .iter()
        .enumerate()
        .filter(|(_, inst)| lhs_holds(&ds.schema, inst, items))
        .map(|(i, _)| i)
        .collect()
}

/// A surviving same-class rule over a subset of the planted features whose
/// matched rows (over the whole cohort) include every planted row.
pub fn recovering_rule<'a>(run: &'a SyntheticRun, planted: &rulelens_core::synth::PlantedRule) -> Option<&'a Rule> {
    let ds = &run.synth.dataset;
    let target = matched_rows(ds, &planted.items);
    let planted_features: BTreeSet<&str> = planted.items.iter().map(|i| i.feature.as_str()).collect();
    run.survivors.iter().find(|r| {
        r.class_value == planted.class_value
            && r.items.iter().all(|i| planted_features.contains(i.feature.as_str()))
            && matched_rows(ds, &r.items).is_superset(&target)
    })
}
