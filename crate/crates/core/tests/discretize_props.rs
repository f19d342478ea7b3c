mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rulelens_core::data::{bins_from_cuts, Instance, Item, Value};
use rulelens_core::discretize::mdlp_discretize;

fn points(values: &[Option<f64>], labels: &[u32]) -> Vec<(f64, u32)> {
    values
        .iter()
        .zip(labels)
        .filter_map(|(v, &l)| v.map(|x| (x, l)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn cuts_follow_the_recursive_procedure(seed in any::<u64>()) {
        let (values, labels) = common::random_series(seed);
        prop_assume!(values.iter().any(Option::is_some));
        let cuts = mdlp_discretize(&values, &labels).unwrap();
        prop_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        let checked = common::check_mdlp(&points(&values, &labels), &cuts);
        prop_assert!(checked.is_ok(), "{:?}", checked);
    }

    #[test]
    fn single_class_series_never_splits(seed in any::<u64>(), n in 1usize..100) {
        let mut rng = common::rng(seed);
        let values: Vec<Option<f64>> =
            (0..n).map(|_| Some(rand::Rng::gen_range(&mut rng, 0.0..10.0))).collect();
        prop_assert!(mdlp_discretize(&values, &vec![7u8; n]).unwrap().is_empty());
    }

    #[test]
    fn permuting_pairs_keeps_cuts(seed in any::<u64>()) {
        let (values, labels) = common::random_series(seed);
        prop_assume!(values.iter().any(Option::is_some));
        let cuts = mdlp_discretize(&values, &labels).unwrap();
        let mut pairs: Vec<(Option<f64>, u32)> = values.into_iter().zip(labels).collect();
        pairs.shuffle(&mut common::rng(seed ^ 0x5eed));
        let (v, l): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        prop_assert_eq!(mdlp_discretize(&v, &l).unwrap(), cuts);
    }

    #[test]
    fn bins_partition_the_line(mut cuts in proptest::collection::vec(-100.0f64..100.0, 0..6), xs in proptest::collection::vec(-200.0f64..200.0, 1..50)) {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let bins = bins_from_cuts(&cuts).unwrap();
        prop_assert_eq!(bins.len(), cuts.len() + 1);
        for x in xs.iter().copied().chain(cuts.iter().copied()) {
            prop_assert_eq!(bins.iter().filter(|b| b.contains(x)).count(), 1);
        }
    }
}

#[test]
fn each_feature_matches_one_item_at_most() {
    let schema = rulelens_core::data::Schema::new(
        vec![rulelens_core::data::FeatureSchema::continuous("age")],
        rulelens_core::data::OutcomeSpec {
            label_values: vec!["a".into(), "b".into()],
            interesting_values: vec!["a".into()],
            continuous_threshold: None,
        },
    )
    .unwrap();
    let bins = bins_from_cuts(&[18.0, 65.0]).unwrap();
    let matchers: Vec<_> = bins
        .iter()
        .map(|b| schema.compile_item(&Item::range("age", *b)).unwrap())
        .collect();
    for (value, expected) in [(Value::Number(10.0), 1), (Value::Number(65.0), 1), (Value::Missing, 0)] {
        let inst = Instance { id: "x".into(), values: vec![value], label: 0 };
        assert_eq!(matchers.iter().filter(|m| m.matches(&inst)).count(), expected);
    }
}
