//! Supervised discretization by recursive entropy minimization with the
//! minimum-description-length stopping test (Fayyad & Irani).

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;

use crate::data::{CutTable, Dataset, FeatureKind, Value};
use crate::error::{Error, Result};

/// Entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn distinct_classes(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// The MDLP acceptance bound for splitting `whole` into `left` and `right`:
/// `[log2(N-1) + log2(3^k - 2) - k·Ent(S) + k1·Ent(S1) + k2·Ent(S2)] / N`.
pub fn mdlp_threshold(whole: &[usize], left: &[usize], right: &[usize]) -> f64 {
    let n = whole.iter().sum::<usize>() as f64;
    let k = distinct_classes(whole) as i32;
    let k1 = distinct_classes(left) as f64;
    let k2 = distinct_classes(right) as f64;
    let delta = (3f64.powi(k) - 2.0).log2() - (k as f64 * entropy(whole)
        - k1 * entropy(left)
        - k2 * entropy(right));
    ((n - 1.0).log2() + delta) / n
}

/// Runs of equal values with their class histogram.
struct Group {
    value: f64,
    counts: Vec<usize>,
}

impl Group {
    fn pure_class(&self) -> Option<usize> {
        let mut it = self.counts.iter().enumerate().filter(|(_, &c)| c > 0);
        match (it.next(), it.next()) {
            (Some((cls, _)), None) => Some(cls),
            _ => None,
        }
    }
}

/// Returns strictly increasing cut points for one continuous feature.
///
/// Missing values are ignored. Candidate cuts are midpoints between adjacent
/// distinct values, skipping pairs whose two value groups are pure in the same
/// class. Among candidates the one with the largest information gain wins,
/// the smallest cut on ties; it is accepted only if the gain exceeds
/// [`mdlp_threshold`], after which both halves are split recursively.
pub fn mdlp_discretize<L: Eq + Hash>(values: &[Option<f64>], labels: &[L]) -> Result<Vec<f64>> {
    if values.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    let mut class_of: HashMap<&L, usize> = HashMap::new();
    let mut pairs = Vec::with_capacity(values.len());
    for (v, label) in values.iter().zip(labels) {
        let Some(x) = *v else { continue };
        if !x.is_finite() {
            return Err(Error::Invalid(format!("non-finite value {x}")));
        }
        let next = class_of.len();
        let cls = *class_of.entry(label).or_insert(next);
        pairs.push((x, cls));
    }
    if pairs.is_empty() {
        return Err(Error::Invalid("all values are missing".into()));
    }
    let n_classes = class_of.len();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<Group> = Vec::new();
    for (x, cls) in pairs {
        match groups.last_mut() {
            Some(g) if g.value == x => g.counts[cls] += 1,
            _ => {
                let mut counts = vec![0; n_classes];
                counts[cls] = 1;
                groups.push(Group { value: x, counts });
            }
        }
    }

    let mut cuts = Vec::new();
    split_segment(&groups, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    Ok(cuts)
}

fn split_segment(groups: &[Group], cuts: &mut Vec<f64>) {
    if groups.len() < 2 {
        return;
    }
    let n_classes = groups[0].counts.len();
    let mut whole = vec![0usize; n_classes];
    for g in groups {
        for (w, c) in whole.iter_mut().zip(&g.counts) {
            *w += c;
        }
    }
    if distinct_classes(&whole) < 2 {
        return;
    }
    let n = whole.iter().sum::<usize>() as f64;
    let ent_whole = entropy(&whole);

    let mut left = vec![0usize; n_classes];
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for i in 0..groups.len() - 1 {
        for (l, c) in left.iter_mut().zip(&groups[i].counts) {
            *l += c;
        }
        let same_pure = match (groups[i].pure_class(), groups[i + 1].pure_class()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        if same_pure {
            continue;
        }
        let right: Vec<usize> = whole.iter().zip(&left).map(|(w, l)| w - l).collect();
        let n_left = left.iter().sum::<usize>() as f64;
        let n_right = n - n_left;
        let gain = ent_whole - (n_left / n) * entropy(&left) - (n_right / n) * entropy(&right);
        if best.as_ref().is_none_or(|(_, g, _)| gain > *g) {
            best = Some((i, gain, left.clone()));
        }
    }

    let Some((i, gain, left)) = best else { return };
    let right: Vec<usize> = whole.iter().zip(&left).map(|(w, l)| w - l).collect();
    if gain > mdlp_threshold(&whole, &left, &right) {
        cuts.push((groups[i].value + groups[i + 1].value) / 2.0);
        split_segment(&groups[..=i], cuts);
        split_segment(&groups[i + 1..], cuts);
    }
}

/// Discretizes every continuous feature of `train` against the outcome labels.
///
/// Features are processed in parallel; a feature whose values are all missing
/// gets no cuts.
pub fn discretize_dataset(train: &Dataset) -> Result<CutTable> {
    let labels: Vec<usize> = train.instances.iter().map(|i| i.label).collect();
    let continuous: Vec<(usize, &str)> = train
        .schema
        .features()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == FeatureKind::Continuous)
        .map(|(i, f)| (i, f.name.as_str()))
        .collect();
    let cuts: Vec<(String, Vec<f64>)> = continuous
        .par_iter()
        .map(|&(idx, name)| {
            let values: Vec<Option<f64>> = train
                .instances
                .iter()
                .map(|inst| match inst.values[idx] {
                    Value::Number(x) => Some(x),
                    _ => None,
                })
                .collect();
            if values.iter().all(Option::is_none) {
                return Ok((name.to_string(), Vec::new()));
            }
            mdlp_discretize(&values, &labels).map(|c| (name.to_string(), c))
        })
        .collect::<Result<_>>()?;
    Ok(cuts.into_iter().collect())
}
