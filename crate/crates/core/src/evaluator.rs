//! Score thresholding, classification metrics, and explanation coverage.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curation::ClassifierRule;
use crate::data::{Dataset, Item};
use crate::error::{Error, Result};
use crate::explainer::ExplainIndex;

/// Patient id to score, as read from a `patient_id,score` CSV.
pub type Scores = BTreeMap<String, f64>;

#[derive(Debug, Deserialize, Serialize)]
struct ScoreRow {
    patient_id: String,
    score: f64,
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Scores> {
    let path = path.as_ref();
    let context = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Scores::new();
    for (i, row) in reader.deserialize::<ScoreRow>().enumerate() {
        let row = row.map_err(|e| Error::Csv { context: context.clone(), source: e })?;
        if !row.score.is_finite() || !(0.0..=1.0).contains(&row.score) {
            return Err(Error::Parse {
                row: i + 1,
                column: "score".into(),
                message: format!("score {} outside [0, 1]", row.score),
            });
        }
        if out.insert(row.patient_id.clone(), row.score).is_some() {
            return Err(Error::Parse {
                row: i + 1,
                column: "patient_id".into(),
                message: format!("duplicate patient id `{}`", row.patient_id),
            });
        }
    }
    Ok(out)
}

pub fn write_scores(path: impl AsRef<Path>, scores: &[(String, f64)]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (patient_id, score) in scores {
        writer
            .serialize(ScoreRow { patient_id: patient_id.clone(), score: *score })
            .map_err(|e| Error::Csv { context: "scores".into(), source: e })?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    crate::canonical::write_atomic(path, &String::from_utf8_lossy(&bytes))
}

/// Scores in dataset order; every instance must be scored.
pub fn align_scores(dataset: &Dataset, scores: &Scores) -> Result<Vec<f64>> {
    dataset
        .instances
        .iter()
        .map(|inst| {
            scores
                .get(&inst.id)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("patient `{}` has no score", inst.id)))
        })
        .collect()
}

/// Whether each instance's true label is interesting.
pub fn positive_labels(dataset: &Dataset) -> Vec<bool> {
    let outcome = dataset.schema.outcome();
    dataset
        .instances
        .iter()
        .map(|inst| outcome.is_interesting(dataset.label_of(inst)))
        .collect()
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Invalid(format!("non-finite score {bad}")));
    }
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Invalid("both classes must be present".into()));
    }
    Ok((pos, neg))
}

/// A threshold strictly between `a < b`: every score ≤ a falls below it
/// and every score ≥ b at or above it.
fn between(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid > a {
        mid
    } else {
        b
    }
}

/// Candidate thresholds in ascending order: below the minimum, between each
/// pair of consecutive distinct scores, and above the maximum.
pub fn cutoff_candidates(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let Some((&lo, &hi)) = distinct.first().zip(distinct.last()) else {
        return Vec::new();
    };
    let below = if lo - 1.0 < lo { lo - 1.0 } else { f64::NEG_INFINITY };
    let above = if hi + 1.0 > hi { hi + 1.0 } else { f64::INFINITY };
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(below);
    out.extend(distinct.windows(2).map(|w| between(w[0], w[1])));
    out.push(above);
    out
}

/// Threshold maximizing sensitivity + specificity, positive when
/// `score >= threshold`; ties go to the smallest threshold.
pub fn youden_cutoff(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let candidates = cutoff_candidates(scores);

    // Candidate k puts the k lowest distinct-score groups below the threshold.
    let mut tp = pos;
    let mut tn = 0u64;
    let objective = |tp: u64, tn: u64| tp as u128 * neg as u128 + tn as u128 * pos as u128;
    let mut best = (candidates[0], objective(tp, tn));
    let mut i = 0;
    for &threshold in &candidates[1..] {
        let value = scores[order[i]];
        while i < order.len() && scores[order[i]] == value {
            if labels[order[i]] {
                tp -= 1;
            } else {
                tn += 1;
            }
            i += 1;
        }
        let obj = objective(tp, tn);
        if obj > best.1 {
            best = (threshold, obj);
        }
    }
    Ok(best.0)
}

/// Sensitivity + specificity − 1 at `threshold`.
pub fn youden_index(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let (mut tp, mut tn) = (0u64, 0u64);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            _ => {}
        }
    }
    Ok(tp as f64 / pos as f64 + tn as f64 / neg as f64 - 1.0)
}

pub fn predict(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s >= threshold).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_metrics(predictions: &[bool], labels: &[bool]) -> Result<ClassificationMetrics> {
    if predictions.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Invalid("no predictions".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(ClassificationMetrics {
        tp,
        fp,
        tn,
        fn_,
        accuracy: (tp + tn) as f64 / predictions.len() as f64,
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        ppv: ratio(tp, tp + fp),
        npv: ratio(tn, tn + fn_),
    })
}

/// Area under the ROC curve as the Mann–Whitney statistic: the share of
/// positive-negative pairs ordered correctly, ties counting half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the number of wins plus ties, kept integral.
    let mut doubled: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let value = scores[order[i]];
        let (mut p, mut n) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == value {
            if labels[order[i]] {
                p += 1;
            } else {
                n += 1;
            }
            i += 1;
        }
        doubled += 2 * p * neg_below + p * n;
        neg_below += n;
    }
    Ok(doubled as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// Per-patient explanation tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientCoverage {
    pub patient_id: String,
    pub positive: bool,
    pub correct_positive: bool,
    /// Rules for the predicted value the patient satisfies.
    pub applicable: usize,
    pub actionable_applicable: usize,
    /// Distinct actionable items on the actionable applicable rules.
    pub identified_actionable_items: usize,
    /// Whether some rule for the patient's true value applies.
    pub explainable_by_label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageHistograms {
    pub rules_per_patient: BTreeMap<usize, usize>,
    pub actionable_rules_per_patient: BTreeMap<usize, usize>,
    pub identified_actionable_items_per_patient: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub n_patients: usize,
    pub n_positives: usize,
    pub n_correct_positives: usize,
    pub n_explained: usize,
    pub n_explained_actionable: usize,
    pub n_positives_explainable: usize,
    pub coverage_correct_positives: f64,
    pub coverage_correct_positives_actionable: f64,
    pub coverage_all_positives: f64,
    pub mean_rules_per_explained: f64,
    pub mean_actionable_rules_per_explained: f64,
    pub mean_identified_actionable_items: f64,
    /// Over explained patients.
    pub histograms: CoverageHistograms,
}

fn share(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Tallies for each test instance. `predicted` holds the externally predicted
/// outcome value per instance, in dataset order.
pub fn patient_coverage(
    test: &Dataset,
    predicted: &[String],
    index: &ExplainIndex<'_>,
) -> Result<Vec<PatientCoverage>> {
    if predicted.len() != test.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} patients",
            predicted.len(),
            test.len()
        )));
    }
    let outcome = test.schema.outcome();
    Ok(test
        .instances
        .par_iter()
        .zip(predicted)
        .map(|(inst, pred)| {
            let label = test.label_of(inst);
            let positive = outcome.is_interesting(label);
            let correct_positive = positive && pred == label;
            let (mut applicable, mut actionable_applicable, mut identified) = (0, 0, 0);
            if outcome.is_interesting(pred) {
                let rules = index.applicable(inst, pred);
                applicable = rules.len();
                actionable_applicable = rules.iter().filter(|r| r.actionable()).count();
                identified = identified_items(&rules, index).len();
            }
            let explainable_by_label = if positive && pred == label {
                applicable > 0
            } else if positive {
                !index.applicable(inst, label).is_empty()
            } else {
                false
            };
            PatientCoverage {
                patient_id: inst.id.clone(),
                positive,
                correct_positive,
                applicable,
                actionable_applicable,
                identified_actionable_items: identified,
                explainable_by_label,
            }
        })
        .collect())
}

pub fn summarize_coverage(patients: &[PatientCoverage]) -> CoverageStats {
    let mut hist = CoverageHistograms {
        rules_per_patient: BTreeMap::new(),
        actionable_rules_per_patient: BTreeMap::new(),
        identified_actionable_items_per_patient: BTreeMap::new(),
    };
    let (mut n_pos, mut n_correct, mut n_explained, mut n_actionable, mut n_by_label) = (0, 0, 0, 0, 0);
    let (mut sum_rules, mut sum_actionable, mut sum_items) = (0usize, 0usize, 0usize);
    for p in patients {
        n_pos += p.positive as usize;
        n_by_label += p.explainable_by_label as usize;
        if !p.correct_positive {
            continue;
        }
        n_correct += 1;
        if p.applicable == 0 {
            continue;
        }
        n_explained += 1;
        n_actionable += (p.actionable_applicable > 0) as usize;
        sum_rules += p.applicable;
        sum_actionable += p.actionable_applicable;
        sum_items += p.identified_actionable_items;
        *hist.rules_per_patient.entry(p.applicable).or_default() += 1;
        *hist.actionable_rules_per_patient.entry(p.actionable_applicable).or_default() += 1;
        *hist
            .identified_actionable_items_per_patient
            .entry(p.identified_actionable_items)
            .or_default() += 1;
    }
    CoverageStats {
        n_patients: patients.len(),
        n_positives: n_pos,
        n_correct_positives: n_correct,
        n_explained,
        n_explained_actionable: n_actionable,
        n_positives_explainable: n_by_label,
        coverage_correct_positives: share(n_explained, n_correct),
        coverage_correct_positives_actionable: share(n_actionable, n_correct),
        coverage_all_positives: share(n_by_label, n_pos),
        mean_rules_per_explained: share(sum_rules, n_explained),
        mean_actionable_rules_per_explained: share(sum_actionable, n_explained),
        mean_identified_actionable_items: share(sum_items, n_explained),
        histograms: hist,
    }
}

pub fn coverage_stats(
    test: &Dataset,
    predicted: &[String],
    index: &ExplainIndex<'_>,
) -> Result<CoverageStats> {
    Ok(summarize_coverage(&patient_coverage(test, predicted, index)?))
}

/// Maps binary predictions to outcome values. Needs exactly one interesting
/// value; negatives get the first uninteresting label.
pub fn predicted_values(dataset: &Dataset, positive: &[bool]) -> Result<Vec<String>> {
    let outcome = dataset.schema.outcome();
    let [interesting] = outcome.interesting_values.as_slice() else {
        return Err(Error::Config(
            "binary scores need exactly one interesting outcome value".into(),
        ));
    };
    let negative = outcome
        .label_values
        .iter()
        .find(|v| !outcome.is_interesting(v))
        .ok_or_else(|| Error::Config("no uninteresting outcome value".into()))?;
    Ok(positive
        .iter()
        .map(|&p| if p { interesting.clone() } else { negative.clone() })
        .collect())
}

pub const FIGURE_FILES: [&str; 3] = ["figure2.csv", "figure3.csv", "figure4.csv"];

fn histogram_csv(column: &str, hist: &BTreeMap<usize, usize>) -> String {
    let mut out = format!("{column},patients\n");
    for (k, v) in hist {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

/// Writes the three per-patient distributions as two-column CSVs.
pub fn write_figures(dir: impl AsRef<Path>, hist: &CoverageHistograms) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tables = [
        ("applicable_rules", &hist.rules_per_patient),
        ("actionable_rules", &hist.actionable_rules_per_patient),
        ("identified_actionable_items", &hist.identified_actionable_items_per_patient),
    ];
    for (file, (column, map)) in FIGURE_FILES.iter().zip(tables) {
        crate::canonical::write_atomic(dir.join(file), &histogram_csv(column, map))?;
    }
    Ok(())
}

/// Distinct actionable item ids over a patient's actionable applicable rules.
pub fn identified_items(rules: &[&ClassifierRule], index: &ExplainIndex<'_>) -> BTreeSet<String> {
    rules
        .iter()
        .filter(|r| r.actionable())
        .flat_map(|r| r.rule.items.iter())
        .filter(|i| index.is_actionable_item(i))
        .map(Item::id)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn youden_examples() {
        let t = youden_cutoff(&[0.1, 0.4, 0.6, 0.9], &[false, false, true, true]).unwrap();
        assert_eq!(t, 0.5);
        let j = youden_index(&[0.1, 0.4, 0.6, 0.9], &[false, false, true, true], t).unwrap();
        assert_eq!(j, 1.0);

        let t = youden_cutoff(&[0.2, 0.8], &[true, false]).unwrap();
        assert_eq!(t, 0.2 - 1.0);
        assert!(youden_cutoff(&[0.2, 0.8], &[true, true]).is_err());
    }

    #[test]
    fn metrics_examples() {
        let pred = [true, true, true, false, false, false];
        let label = [true, true, false, false, false, false];
        let m = classification_metrics(&pred, &label).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (2, 1, 3, 0));
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(0.75));
        assert_eq!(m.ppv, Some(2.0 / 3.0));
        assert_eq!(m.npv, Some(1.0));
        assert_eq!(m.accuracy, 5.0 / 6.0);

        let m = classification_metrics(&[false, false], &[true, false]).unwrap();
        assert_eq!(m.ppv, None);

        let m = classification_metrics(&[true, false], &[true, false]).unwrap();
        assert_eq!(
            [m.sensitivity, m.specificity, m.ppv, m.npv, Some(m.accuracy)],
            [Some(1.0); 5]
        );
        assert!(classification_metrics(&[true], &[true, false]).is_err());
        assert!(classification_metrics(&[], &[]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &[false, true, false, true]).unwrap(), 0.5);
        // Positives 0.4 and 0.8 beat both negatives.
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[false, true, false, true]).unwrap(), 1.0);
        // Positive 0.35 loses to negative 0.4; the other three pairs are ordered.
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
    }

    #[test]
    fn candidates_between_adjacent_floats() {
        let a = 0.3f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let c = cutoff_candidates(&[b, a]);
        assert_eq!(c.len(), 3);
        assert!(c[1] > a && c[1] <= b);
    }
}
