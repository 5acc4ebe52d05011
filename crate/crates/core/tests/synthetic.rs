//! Statistical checks against data drawn from known generative models.

use std::collections::BTreeMap;

use talentbayes::insight::entropy_bits;
use talentbayes::{
    attribute_influence, bayes_optimal_accuracy, cross_validate, evaluate, generate, random_spec,
    train, AttributeSchema, AttributeSpec, Dataset, GenerativeSpec, Instance, TrainConfig,
};

fn three_by_six() -> GenerativeSpec {
    random_spec(3, &[3, 3, 3, 3, 3, 3], 0, 2024).unwrap()
}

#[test]
fn cross_validation_tracks_bayes_optimal_accuracy() {
    let spec = three_by_six();
    let optimal = bayes_optimal_accuracy(&spec, 1, 0).unwrap();
    assert!(optimal.exact);
    let data = generate(&spec, 10_000, 1).unwrap();
    let report = cross_validate(&data, 10, 2, TrainConfig::default()).unwrap();
    let mean = report.cross_validation.unwrap().mean_accuracy;
    assert!((mean - optimal.accuracy).abs() < 0.02, "cv {mean} vs optimal {}", optimal.accuracy);
}

#[test]
fn fresh_sample_accuracy_tracks_bayes_optimal_accuracy() {
    let spec = three_by_six();
    let optimal = bayes_optimal_accuracy(&spec, 1, 0).unwrap().accuracy;
    let model = train(&generate(&spec, 20_000, 3).unwrap(), TrainConfig::default()).unwrap();
    let test = generate(&spec, 10_000, 4).unwrap();
    let acc = evaluate(&model, &test).unwrap().accuracy;
    assert!((acc - optimal).abs() < 0.02, "test {acc} vs optimal {optimal}");
}

#[test]
fn resubstitution_is_optimistic_on_average() {
    let spec = random_spec(3, &[4, 4, 4, 4], 0, 77).unwrap();
    let mut gap = 0.0;
    for seed in 0..20 {
        let data = generate(&spec, 150, seed).unwrap();
        let model = train(&data, TrainConfig::default()).unwrap();
        let resub = evaluate(&model, &data).unwrap().accuracy;
        let cv = cross_validate(&data, 5, seed, TrainConfig::default())
            .unwrap()
            .cross_validation
            .unwrap()
            .mean_accuracy;
        gap += resub - cv;
    }
    assert!(gap / 20.0 > 0.0, "mean gap {}", gap / 20.0);
}

#[test]
fn independent_attribute_has_negligible_influence() {
    let mut spec = random_spec(2, &[3, 3], 0, 5).unwrap();
    let flat = vec![0.2, 0.3, 0.5];
    let table: BTreeMap<String, Vec<f64>> = spec
        .schema
        .class_labels()
        .iter()
        .map(|l| (l.clone(), flat.clone()))
        .collect();
    spec.categorical.insert("cat1".into(), table);
    spec.class_priors = vec![0.5, 0.5];
    let data = generate(&spec, 10_000, 8).unwrap();
    let counts = data.class_counts().unwrap();
    assert!(counts.iter().all(|&c| (4850..=5150).contains(&c)), "{counts:?}");
    let ranking = attribute_influence(&data).unwrap();
    assert!(ranking.get("cat1").unwrap() <= 0.01, "{ranking:?}");
}

#[test]
fn attribute_copying_the_class_has_maximal_influence() {
    let schema = AttributeSchema::new(
        "class",
        vec!["good".into(), "average".into(), "poor".into()],
        vec![
            AttributeSpec::categorical("copy", &["good", "average", "poor"]),
            AttributeSpec::categorical("noise", &["x", "y"]),
        ],
    )
    .unwrap();
    let labels = ["good", "good", "average", "poor", "poor", "poor", "good"];
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            Instance::new()
                .with("copy", *l)
                .with("noise", if i % 2 == 0 { "x" } else { "y" })
                .with_label(*l)
        })
        .collect();
    let data = Dataset::new(schema, rows).unwrap();
    let h = entropy_bits(&[3, 1, 3]);
    let ranking = attribute_influence(&data).unwrap();
    assert_eq!(ranking.entries[0].attribute, "copy");
    assert!((ranking.entries[0].mutual_information - h).abs() < 1e-12);
}
