//! Dataset vocabulary: schemas, instances, value bins and rule items, plus
//! CSV ingestion, outcome categorization and the seeded train/test split.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Label assigned to raw outcome values strictly above the threshold.
pub const ABOVE: &str = "above";
/// Label assigned to raw outcome values at or below the threshold.
pub const BELOW: &str = "below";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
}

impl FeatureSchema {
    pub fn categorical(name: impl Into<String>, values: &[&str]) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Categorical,
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Continuous,
            values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub label_values: Vec<String>,
    pub interesting_values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous_threshold: Option<f64>,
}

impl OutcomeSpec {
    pub fn is_interesting(&self, label: &str) -> bool {
        self.interesting_values.iter().any(|v| v == label)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_values.iter().position(|v| v == label)
    }
}

#[derive(Deserialize)]
struct SchemaRepr {
    features: Vec<FeatureSchema>,
    outcome: OutcomeSpec,
}

/// A validated feature schema together with the outcome definition.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "SchemaRepr")]
pub struct Schema {
    features: Vec<FeatureSchema>,
    outcome: OutcomeSpec,
    by_name: HashMap<String, usize>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features && self.outcome == other.outcome
    }
}

impl Serialize for Schema {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            features: &'a [FeatureSchema],
            outcome: &'a OutcomeSpec,
        }
        Out {
            features: &self.features,
            outcome: &self.outcome,
        }
        .serialize(serializer)
    }
}

impl TryFrom<SchemaRepr> for Schema {
    type Error = Error;

    fn try_from(repr: SchemaRepr) -> Result<Self> {
        Schema::new(repr.features, repr.outcome)
    }
}

impl Schema {
    pub fn new(features: Vec<FeatureSchema>, outcome: OutcomeSpec) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(features.len());
        for (idx, feature) in features.iter().enumerate() {
            if feature.name.is_empty() {
                return Err(Error::Schema("feature name must be nonempty".into()));
            }
            if feature.name == "id" || feature.name == "label" {
                return Err(Error::Schema(format!(
                    "feature name `{}` is reserved for the CSV layout",
                    feature.name
                )));
            }
            if by_name.insert(feature.name.clone(), idx).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate feature name `{}`",
                    feature.name
                )));
            }
            match feature.kind {
                FeatureKind::Categorical => {
                    if feature.values.is_empty() {
                        return Err(Error::Schema(format!(
                            "categorical feature `{}` declares no values",
                            feature.name
                        )));
                    }
                    let distinct: HashSet<&String> = feature.values.iter().collect();
                    if distinct.len() != feature.values.len() {
                        return Err(Error::Schema(format!(
                            "categorical feature `{}` declares a value twice",
                            feature.name
                        )));
                    }
                }
                FeatureKind::Continuous => {
                    if !feature.values.is_empty() {
                        return Err(Error::Schema(format!(
                            "continuous feature `{}` must not declare values",
                            feature.name
                        )));
                    }
                }
            }
        }

        let labels: HashSet<&String> = outcome.label_values.iter().collect();
        if outcome.label_values.len() < 2 {
            return Err(Error::Schema("outcome needs at least two label values".into()));
        }
        if labels.len() != outcome.label_values.len() {
            return Err(Error::Schema("outcome label values must be distinct".into()));
        }
        if outcome.interesting_values.is_empty() {
            return Err(Error::Schema("outcome needs at least one interesting value".into()));
        }
        for v in &outcome.interesting_values {
            if !labels.contains(v) {
                return Err(Error::Schema(format!(
                    "interesting value `{v}` is not a label value"
                )));
            }
        }
        if let Some(t) = outcome.continuous_threshold {
            if !t.is_finite() {
                return Err(Error::Schema("continuous_threshold must be finite".into()));
            }
            let expected: HashSet<&str> = [ABOVE, BELOW].into_iter().collect();
            let got: HashSet<&str> = outcome.label_values.iter().map(String::as_str).collect();
            if got != expected {
                return Err(Error::Schema(format!(
                    "a continuous outcome is categorized into `{ABOVE}`/`{BELOW}`; label_values must be exactly those"
                )));
            }
        }

        Ok(Schema {
            features,
            outcome,
            by_name,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            // `try_from` validation failures surface as serde custom errors.
            if e.is_data() {
                Error::Schema(format!("{}: {e}", path.display()))
            } else {
                Error::json(path, e)
            }
        })
    }

    pub fn features(&self) -> &[FeatureSchema] {
        &self.features
    }

    pub fn outcome(&self) -> &OutcomeSpec {
        &self.outcome
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureSchema> {
        self.feature_index(name).map(|i| &self.features[i])
    }

    /// Resolves an item against this schema for fast repeated matching.
    pub fn compile_item(&self, item: &Item) -> Result<ItemMatcher> {
        let idx = self
            .feature_index(&item.feature)
            .ok_or_else(|| Error::Schema(format!("unknown feature `{}`", item.feature)))?;
        let feature = &self.features[idx];
        let test = match (&item.value, feature.kind) {
            (ItemValue::Category(c), FeatureKind::Categorical) => {
                let pos = feature.values.iter().position(|v| v == c).ok_or_else(|| {
                    Error::Schema(format!(
                        "value `{c}` is not declared for feature `{}`",
                        feature.name
                    ))
                })?;
                MatchTest::Category(pos as u32)
            }
            (ItemValue::Range(bin), FeatureKind::Continuous) => MatchTest::Range(*bin),
            _ => {
                return Err(Error::Schema(format!(
                    "item `{item}` does not match the kind of feature `{}`",
                    feature.name
                )))
            }
        };
        Ok(ItemMatcher { feature: idx, test })
    }
}

/// A half-open interval `[lo, hi)`; `lo` may be `-inf` and `hi` may be `+inf`.
#[derive(Debug, Clone, Copy)]
pub struct Bin {
    lo: f64,
    hi: f64,
}

impl Bin {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::Invalid(format!("bin bounds must satisfy lo < hi, got [{lo}, {hi})")));
        }
        // Normalize -0.0 so equal bins hash equally.
        Ok(Bin {
            lo: lo + 0.0,
            hi: hi + 0.0,
        })
    }

    pub fn full() -> Self {
        Bin {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

impl PartialEq for Bin {
    fn eq(&self, other: &Self) -> bool {
        self.lo.to_bits() == other.lo.to_bits() && self.hi.to_bits() == other.hi.to_bits()
    }
}

impl Eq for Bin {}

impl Hash for Bin {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.lo.to_bits().hash(state);
        self.hi.to_bits().hash(state);
    }
}

impl Ord for Bin {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then_with(|| self.hi.total_cmp(&other.hi))
    }
}

impl PartialOrd for Bin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == f64::NEG_INFINITY {
            write!(f, "(-inf,")?;
        } else {
            write!(f, "[{},", self.lo)?;
        }
        if self.hi == f64::INFINITY {
            write!(f, "inf)")
        } else {
            write!(f, "{})", self.hi)
        }
    }
}

// Unbounded ends are written as `null`, since JSON has no infinities.
#[derive(Serialize, Deserialize)]
struct BinRepr {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl Serialize for Bin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BinRepr {
            lo: self.lo.is_finite().then_some(self.lo),
            hi: self.hi.is_finite().then_some(self.hi),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Bin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = BinRepr::deserialize(deserializer)?;
        Bin::new(
            repr.lo.unwrap_or(f64::NEG_INFINITY),
            repr.hi.unwrap_or(f64::INFINITY),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Turns strictly increasing cut points into the covering list of half-open bins.
pub fn bins_from_cuts(cuts: &[f64]) -> Result<Vec<Bin>> {
    if cuts.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid("cut points must be finite".into()));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("cut points must be strictly increasing".into()));
    }
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(f64::NEG_INFINITY);
    bounds.extend_from_slice(cuts);
    bounds.push(f64::INFINITY);
    bounds.windows(2).map(|w| Bin::new(w[0], w[1])).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ItemValue {
    Category(String),
    Range(Bin),
}

impl fmt::Display for ItemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemValue::Category(c) => f.write_str(c),
            ItemValue::Range(b) => b.fmt(f),
        }
    }
}

/// A feature-value pair: the feature takes the category, or a value inside the bin.
///
/// Items order by feature name, then by value; that order is the canonical
/// one used for rule ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub feature: String,
    pub value: ItemValue,
}

impl Item {
    pub fn category(feature: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            feature: feature.into(),
            value: ItemValue::Category(value.into()),
        }
    }

    pub fn range(feature: impl Into<String>, bin: Bin) -> Self {
        Item {
            feature: feature.into(),
            value: ItemValue::Range(bin),
        }
    }

    /// Stable textual key, `feature=value` or `feature=[lo,hi)`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    /// Human-readable form: `bmi ≥ 35`, `age < 65`, `x ∈ [1, 2)`, `sex = f`.
    pub fn render(&self) -> String {
        match &self.value {
            ItemValue::Category(c) => format!("{} = {}", self.feature, c),
            ItemValue::Range(b) => match (b.lo.is_finite(), b.hi.is_finite()) {
                (false, false) => format!("{} is any value", self.feature),
                (true, false) => format!("{} ≥ {}", self.feature, b.lo),
                (false, true) => format!("{} < {}", self.feature, b.hi),
                (true, true) => format!("{} ∈ [{}, {})", self.feature, b.lo, b.hi),
            },
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.feature, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MatchTest {
    Category(u32),
    Range(Bin),
}

/// An item resolved to a schema column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemMatcher {
    feature: usize,
    test: MatchTest,
}

impl ItemMatcher {
    pub fn feature_index(&self) -> usize {
        self.feature
    }

    /// Missing values never match.
    pub fn matches(&self, instance: &Instance) -> bool {
        match (self.test, &instance.values[self.feature]) {
            (MatchTest::Category(c), Value::Category(v)) => c == *v,
            (MatchTest::Range(bin), Value::Number(x)) => bin.contains(*x),
            _ => false,
        }
    }
}

/// One cell of an instance. Categories are indices into the feature's declared values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Missing,
    Category(u32),
    Number(f64),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

/// One patient row. `values` is aligned with the schema's feature list; `label`
/// indexes the outcome's label values.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub values: Vec<Value>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: Schema, instances: Vec<Instance>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(instances.len());
        let n_features = schema.features.len();
        for inst in &instances {
            if !seen.insert(inst.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate instance id `{}`", inst.id)));
            }
            if inst.values.len() != n_features {
                return Err(Error::Invalid(format!(
                    "instance `{}` has {} values, schema has {n_features} features",
                    inst.id,
                    inst.values.len()
                )));
            }
            if inst.label >= schema.outcome.label_values.len() {
                return Err(Error::Invalid(format!("instance `{}` has an unknown label", inst.id)));
            }
            for (value, feature) in inst.values.iter().zip(&schema.features) {
                let ok = match (value, feature.kind) {
                    (Value::Missing, _) => true,
                    (Value::Category(c), FeatureKind::Categorical) => {
                        (*c as usize) < feature.values.len()
                    }
                    (Value::Number(x), FeatureKind::Continuous) => x.is_finite(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::Invalid(format!(
                        "instance `{}`: value for `{}` does not type-check",
                        inst.id, feature.name
                    )));
                }
            }
        }
        Ok(Dataset { schema, instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_of(&self, instance: &Instance) -> &str {
        &self.schema.outcome.label_values[instance.label]
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Reads an RFC-4180 CSV with a header row containing `id`, `label` and
    /// every schema feature. Empty cells are missing values.
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, schema, &path.display().to_string())
    }

    pub fn read_csv<R: std::io::Read>(reader: R, schema: &Schema, context: &str) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            context: context.to_string(),
            source,
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();

        let mut id_col = None;
        let mut label_col = None;
        let mut feature_cols = vec![None; schema.features.len()];
        for (col, name) in headers.iter().enumerate() {
            match name {
                "id" => id_col = Some(col),
                "label" => label_col = Some(col),
                other => match schema.feature_index(other) {
                    Some(f) if feature_cols[f].is_none() => feature_cols[f] = Some(col),
                    Some(_) => {
                        return Err(Error::Schema(format!("{context}: column `{other}` appears twice")))
                    }
                    None => {
                        return Err(Error::Schema(format!(
                            "{context}: column `{other}` is not a schema feature"
                        )))
                    }
                },
            }
        }
        let id_col = id_col.ok_or_else(|| Error::Schema(format!("{context}: missing `id` column")))?;
        let label_col =
            label_col.ok_or_else(|| Error::Schema(format!("{context}: missing `label` column")))?;
        let feature_cols: Vec<usize> = feature_cols
            .into_iter()
            .enumerate()
            .map(|(f, col)| {
                col.ok_or_else(|| {
                    Error::Schema(format!(
                        "{context}: missing column for feature `{}`",
                        schema.features[f].name
                    ))
                })
            })
            .collect::<Result<_>>()?;

        let mut instances = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            // 1-based data row numbers, header excluded.
            let row = row_idx + 1;
            let record = record.map_err(csv_err)?;
            let id = record.get(id_col).unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: "id".into(),
                    message: "empty id".into(),
                });
            }
            let mut values = Vec::with_capacity(feature_cols.len());
            for (feature, &col) in schema.features.iter().zip(&feature_cols) {
                let cell = record.get(col).unwrap_or("");
                values.push(parse_cell(cell, feature).map_err(|message| Error::Parse {
                    row,
                    column: feature.name.clone(),
                    message,
                })?);
            }
            let label_cell = record.get(label_col).unwrap_or("");
            let label = parse_label(label_cell, &schema.outcome).map_err(|message| Error::Parse {
                row,
                column: "label".into(),
                message,
            })?;
            instances.push(Instance { id, values, label });
        }
        Dataset::new(schema.clone(), instances)
    }

    /// Writes the dataset in the same CSV layout [`Dataset::load_csv`] reads.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let csv_err = |source| Error::Csv {
            context: "writing dataset".into(),
            source,
        };
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.schema.features.iter().map(|f| f.name.clone()));
        header.push("label".into());
        wtr.write_record(&header).map_err(csv_err)?;
        for inst in &self.instances {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(inst.id.clone());
            for (v, feature) in inst.values.iter().zip(&self.schema.features) {
                rec.push(match v {
                    Value::Missing => String::new(),
                    Value::Category(c) => feature.values[*c as usize].clone(),
                    Value::Number(x) => x.to_string(),
                });
            }
            rec.push(self.label_of(inst).to_string());
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }
}

fn parse_cell(cell: &str, feature: &FeatureSchema) -> std::result::Result<Value, String> {
    if cell.is_empty() {
        return Ok(Value::Missing);
    }
    match feature.kind {
        FeatureKind::Continuous => match cell.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Number(x)),
            _ => Err(format!("cannot parse `{cell}` as a finite number")),
        },
        FeatureKind::Categorical => feature
            .values
            .iter()
            .position(|v| v == cell)
            .map(|p| Value::Category(p as u32))
            .ok_or_else(|| format!("unknown category `{cell}`")),
    }
}

fn parse_label(cell: &str, outcome: &OutcomeSpec) -> std::result::Result<usize, String> {
    if let Some(threshold) = outcome.continuous_threshold {
        let raw: f64 = cell
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse outcome `{cell}` as a number"))?;
        let label = categorize_value(raw, threshold).map_err(|e| e.to_string())?;
        return outcome
            .label_index(label)
            .ok_or_else(|| format!("label `{label}` missing from label_values"));
    }
    outcome
        .label_index(cell)
        .ok_or_else(|| format!("unknown label `{cell}`"))
}

fn categorize_value(raw: f64, threshold: f64) -> Result<&'static str> {
    if !raw.is_finite() {
        return Err(Error::Invalid(format!("non-finite outcome value {raw}")));
    }
    Ok(if raw > threshold { ABOVE } else { BELOW })
}

/// Maps raw continuous outcomes to `above` (strictly greater than the
/// threshold) or `below` (everything else, including exact hits).
pub fn categorize_outcome(raw: &[f64], threshold: f64) -> Result<Vec<&'static str>> {
    if !threshold.is_finite() {
        return Err(Error::Invalid("threshold must be finite".into()));
    }
    raw.iter().map(|&x| categorize_value(x, threshold)).collect()
}

/// Uniform integer in `[0, bound)` from one or more 64-bit draws
/// (multiply-shift with rejection, so the result is exactly uniform).
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let reject_below = bound.wrapping_neg() % bound;
    loop {
        let m = (rng.next_u64() as u128) * (bound as u128);
        if (m as u64) >= reject_below {
            return (m >> 64) as u64;
        }
    }
}

/// Seeded permutation of `0..n`: ChaCha8 (`rand_chacha`, `seed_from_u64`)
/// driving a descending Fisher–Yates shuffle.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

/// Unstratified random split. The first `round(fraction * N)` positions of the
/// seeded permutation form the training set; both parts keep file order.
pub fn split_train_test(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    if dataset.is_empty() {
        return Err(Error::Invalid("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let n_train = (fraction * n as f64).round() as usize;
    let order = seeded_permutation(n, seed);
    let mut train: Vec<usize> = order[..n_train].to_vec();
    let mut test: Vec<usize> = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Per-feature cut points, as exported by the discretizer.
pub type CutTable = BTreeMap<String, Vec<f64>>;
