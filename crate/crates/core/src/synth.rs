//! Seeded synthetic cohorts with planted rules and a ground-truth manifest.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Bin, Dataset, FeatureKind, FeatureSchema, Instance, Item, OutcomeSpec, Schema, Value};
use crate::error::{Error, Result};

pub const CASE: &str = "case";
pub const CONTROL: &str = "control";
/// Continuous features are integers drawn uniformly from `0..CONTINUOUS_RANGE`.
pub const CONTINUOUS_RANGE: u32 = 40;
const CATEGORY_NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub features: usize,
    pub planted: usize,
    pub seed: u64,
    /// Case probability for rows matching no planted rule.
    pub base_rate: f64,
    pub min_confidence: f64,
    pub max_confidence: f64,
    /// Bounds on the probability that a row matches a planted left-hand side.
    pub min_lhs_probability: f64,
    pub max_lhs_probability: f64,
    /// Missing-value rate on features not used by any planted rule.
    pub missing_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rows: 10_000,
            features: 50,
            planted: 10,
            seed: 0,
            base_rate: 0.05,
            min_confidence: 0.8,
            max_confidence: 0.95,
            min_lhs_probability: 0.03,
            max_lhs_probability: 0.10,
            missing_rate: 0.02,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.rows == 0 {
            return Err(Error::Config("rows must be positive".into()));
        }
        if self.features < 3 * self.planted.max(1) {
            return Err(Error::Config(format!(
                "{} features cannot host {} planted rules of up to 3 items each",
                self.features, self.planted
            )));
        }
        if ![self.base_rate, self.min_confidence, self.max_confidence, self.missing_rate]
            .into_iter()
            .all(unit)
            || self.min_confidence > self.max_confidence
        {
            return Err(Error::Config("rates and confidences must lie in [0, 1]".into()));
        }
        if !(0.0 < self.min_lhs_probability && self.min_lhs_probability <= self.max_lhs_probability)
            || !unit(self.max_lhs_probability)
        {
            return Err(Error::Config("invalid left-hand-side probability bounds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedRule {
    pub items: Vec<Item>,
    pub class_value: String,
    /// Case probability assigned to rows matching the items.
    pub confidence: f64,
    pub lhs_probability: f64,
    /// Observed over the generated rows.
    pub matched_rows: usize,
    pub observed_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub config: SynthConfig,
    pub planted: Vec<PlantedRule>,
    /// Features used by planted rules, in schema order.
    pub planted_features: Vec<String>,
}

pub struct SynthOutput {
    pub dataset: Dataset,
    pub manifest: SynthManifest,
    /// Bayes-optimal case probability per row, in dataset order.
    pub scores: Vec<(String, f64)>,
}

fn feature_name(i: usize) -> String {
    format!("f{i:02}")
}

/// A planted predicate on one feature, kept in the form used to label rows.
#[derive(Clone)]
enum Predicate {
    Category(u32),
    AtLeast(u32),
    Below(u32),
}

impl Predicate {
    fn probability(&self, cardinality: u32) -> f64 {
        match *self {
            Predicate::Category(_) => 1.0 / cardinality as f64,
            Predicate::AtLeast(t) => (CONTINUOUS_RANGE - t) as f64 / CONTINUOUS_RANGE as f64,
            Predicate::Below(t) => t as f64 / CONTINUOUS_RANGE as f64,
        }
    }

    fn holds(&self, value: &Value) -> bool {
        match (self, value) {
            (Predicate::Category(c), Value::Category(v)) => c == v,
            (Predicate::AtLeast(t), Value::Number(x)) => *x >= *t as f64,
            (Predicate::Below(t), Value::Number(x)) => *x < *t as f64,
            _ => false,
        }
    }

    fn item(&self, feature: &FeatureSchema) -> Item {
        // Integer data, so any cut in (t - 1, t] selects the same rows.
        let edge = |t: u32| t as f64 - 0.5;
        match *self {
            Predicate::Category(c) => Item::category(&feature.name, feature.values[c as usize].as_str()),
            Predicate::AtLeast(t) => Item::range(&feature.name, Bin::new(edge(t), f64::INFINITY).unwrap()),
            Predicate::Below(t) => Item::range(&feature.name, Bin::new(f64::NEG_INFINITY, edge(t)).unwrap()),
        }
    }
}

struct Plant {
    predicates: Vec<(usize, Predicate)>,
    confidence: f64,
    lhs_probability: f64,
}

fn sample_plants(config: &SynthConfig, schema: &Schema, rng: &mut ChaCha8Rng) -> Result<Vec<Plant>> {
    let mut pool: Vec<usize> = (0..config.features).collect();
    pool.shuffle(rng);
    let mut plants = Vec::with_capacity(config.planted);
    let mut attempts = 0;
    while plants.len() < config.planted {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Config(
                "could not place planted rules within the left-hand-side probability bounds".into(),
            ));
        }
        let len = rng.gen_range(2..=3).min(pool.len());
        let mut chosen: Vec<usize> = pool.choose_multiple(rng, len).copied().collect();
        chosen.sort_unstable();
        let mut probability = 1.0;
        let mut predicates = Vec::with_capacity(len);
        for &f in &chosen {
            let feature = &schema.features()[f];
            let predicate = match feature.kind {
                FeatureKind::Categorical => {
                    Predicate::Category(rng.gen_range(0..feature.values.len() as u32))
                }
                FeatureKind::Continuous => {
                    let t = rng.gen_range(4..=CONTINUOUS_RANGE - 4);
                    if rng.gen_bool(0.5) {
                        Predicate::AtLeast(t)
                    } else {
                        Predicate::Below(t)
                    }
                }
            };
            probability *= predicate.probability(feature.values.len() as u32);
            predicates.push((f, predicate));
        }
        if !(config.min_lhs_probability..=config.max_lhs_probability).contains(&probability) {
            continue;
        }
        pool.retain(|f| !chosen.contains(f));
        plants.push(Plant {
            predicates,
            confidence: rng.gen_range(config.min_confidence..=config.max_confidence),
            lhs_probability: probability,
        });
    }
    Ok(plants)
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let features: Vec<FeatureSchema> = (0..config.features)
        .map(|i| {
            if i % 2 == 0 {
                let k = rng.gen_range(2..=CATEGORY_NAMES.len());
                FeatureSchema::categorical(feature_name(i), &CATEGORY_NAMES[..k])
            } else {
                FeatureSchema::continuous(feature_name(i))
            }
        })
        .collect();
    let schema = Schema::new(
        features,
        OutcomeSpec {
            label_values: vec![CASE.into(), CONTROL.into()],
            interesting_values: vec![CASE.into()],
            continuous_threshold: None,
        },
    )?;

    let plants = sample_plants(config, &schema, &mut rng)?;
    let planted_features: BTreeSet<usize> =
        plants.iter().flat_map(|p| p.predicates.iter().map(|(f, _)| *f)).collect();

    let mut instances = Vec::with_capacity(config.rows);
    let mut scores = Vec::with_capacity(config.rows);
    let mut matched = vec![0usize; plants.len()];
    let mut matched_cases = vec![0usize; plants.len()];
    let width = config.rows.saturating_sub(1).to_string().len();
    for row in 0..config.rows {
        let values: Vec<Value> = schema
            .features()
            .iter()
            .enumerate()
            .map(|(f, feature)| {
                if !planted_features.contains(&f) && rng.gen_bool(config.missing_rate) {
                    return Value::Missing;
                }
                match feature.kind {
                    FeatureKind::Categorical => {
                        Value::Category(rng.gen_range(0..feature.values.len() as u32))
                    }
                    FeatureKind::Continuous => Value::Number(rng.gen_range(0..CONTINUOUS_RANGE) as f64),
                }
            })
            .collect();
        let hits: Vec<usize> = plants
            .iter()
            .enumerate()
            .filter(|(_, p)| p.predicates.iter().all(|(f, pred)| pred.holds(&values[*f])))
            .map(|(i, _)| i)
            .collect();
        let p_case = hits
            .iter()
            .map(|&i| plants[i].confidence)
            .fold(config.base_rate, f64::max);
        let case = rng.gen_bool(p_case);
        for &i in &hits {
            matched[i] += 1;
            matched_cases[i] += case as usize;
        }
        let id = format!("p{row:0width$}");
        scores.push((id.clone(), p_case));
        instances.push(Instance { id, values, label: if case { 0 } else { 1 } });
    }

    let planted = plants
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut items: Vec<Item> = p
                .predicates
                .iter()
                .map(|(f, pred)| pred.item(&schema.features()[*f]))
                .collect();
            items.sort();
            PlantedRule {
                items,
                class_value: CASE.into(),
                confidence: p.confidence,
                lhs_probability: p.lhs_probability,
                matched_rows: matched[i],
                observed_confidence: if matched[i] == 0 {
                    0.0
                } else {
                    matched_cases[i] as f64 / matched[i] as f64
                },
            }
        })
        .collect();
    let manifest = SynthManifest {
        config: config.clone(),
        planted,
        planted_features: planted_features.iter().map(|&f| feature_name(f)).collect(),
    };
    Ok(SynthOutput {
        dataset: Dataset::new(schema, instances)?,
        manifest,
        scores,
    })
}
