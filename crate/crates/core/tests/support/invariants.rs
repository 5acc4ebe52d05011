//! Random small datasets and the model invariants checked against them.
//!
//! Shared by the core property tests and the acceptance suite, which runs the
//! same checks with a larger case count.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use talentbayes::{
    deserialize, fingerprint, predict, serialize, stratified_folds, train, AttributeSchema,
    AttributeSpec, Dataset, Instance, NaiveBayesModel, TrainConfig, Trainer, Value,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Categorical(usize),
    Numeric,
}

/// A generated training set, its shapes, a probe instance and a smoothing
/// constant.
#[derive(Debug, Clone)]
pub struct Case {
    pub shapes: Vec<Shape>,
    pub dataset: Dataset,
    pub probe: Instance,
    pub alpha: f64,
}

pub fn attr_name(j: usize) -> String {
    format!("a{j}")
}

pub fn value_name(v: usize) -> String {
    format!("v{v}")
}

fn shape_strategy(numeric: bool) -> BoxedStrategy<Shape> {
    let categorical = (2usize..=3).prop_map(Shape::Categorical);
    if numeric {
        prop_oneof![3 => categorical, 1 => Just(Shape::Numeric)].boxed()
    } else {
        categorical.boxed()
    }
}

/// Cell values are encoded as `Option<f64>`: a category index for categorical
/// attributes, the number itself for numeric ones.
fn cell_strategy(shape: Shape) -> BoxedStrategy<Option<f64>> {
    let present = match shape {
        Shape::Categorical(v) => (0..v).prop_map(|i| i as f64).boxed(),
        Shape::Numeric => (-20i32..=20).prop_map(|x| f64::from(x) / 4.0).boxed(),
    };
    prop_oneof![1 => Just(None), 5 => present.prop_map(Some)].boxed()
}

fn to_value(shape: Shape, cell: Option<f64>) -> Value {
    match (shape, cell) {
        (_, None) => Value::Missing,
        (Shape::Categorical(_), Some(i)) => Value::Category(value_name(i as usize)),
        (Shape::Numeric, Some(x)) => Value::Number(x),
    }
}

pub fn schema_for(k: usize, shapes: &[Shape]) -> AttributeSchema {
    let attributes = shapes
        .iter()
        .enumerate()
        .map(|(j, s)| match s {
            Shape::Categorical(v) => {
                let values: Vec<String> = (0..*v).map(value_name).collect();
                let refs: Vec<&str> = values.iter().map(String::as_str).collect();
                AttributeSpec::categorical(attr_name(j), &refs)
            }
            Shape::Numeric => AttributeSpec::numeric(attr_name(j)),
        })
        .collect();
    let labels = (0..k).map(|c| format!("c{c}")).collect();
    AttributeSchema::new("class", labels, attributes).expect("generated schema is valid")
}

pub fn instance_from_cells(shapes: &[Shape], cells: &[Option<f64>]) -> Instance {
    let mut instance = Instance::new();
    for (j, (shape, cell)) in shapes.iter().zip(cells).enumerate() {
        instance.set(attr_name(j), to_value(*shape, *cell));
    }
    instance
}

/// Up to `max_attrs` attributes, 2 or 3 classes, and between `k` and
/// `max_rows` rows. The first `k` rows cover every class once.
pub fn case_strategy(numeric: bool, max_attrs: usize, max_rows: usize) -> impl Strategy<Value = Case> {
    (
        2usize..=3,
        prop::collection::vec(shape_strategy(numeric), 1..=max_attrs),
    )
        .prop_flat_map(move |(k, shapes)| {
            let cells: Vec<BoxedStrategy<Option<f64>>> =
                shapes.iter().map(|s| cell_strategy(*s)).collect();
            let row = (0..k, cells.clone());
            (
                Just(k),
                Just(shapes),
                prop::collection::vec(cells.clone(), k),
                prop::collection::vec(row, 0..=max_rows - k),
                cells,
                prop_oneof![Just(1.0), Just(0.5), Just(2.0), 0.05f64..3.0],
            )
        })
        .prop_map(|(k, shapes, covering, extra, probe, alpha)| {
            let schema = schema_for(k, &shapes);
            let mut instances: Vec<Instance> = covering
                .iter()
                .enumerate()
                .map(|(c, cells)| instance_from_cells(&shapes, cells).with_label(format!("c{c}")))
                .collect();
            for (c, cells) in &extra {
                instances.push(instance_from_cells(&shapes, cells).with_label(format!("c{c}")));
            }
            let dataset = Dataset::new(schema, instances).expect("generated rows conform");
            Case {
                probe: instance_from_cells(&shapes, &probe),
                shapes,
                dataset,
                alpha,
            }
        })
}

pub fn model_of(case: &Case) -> NaiveBayesModel {
    train(&case.dataset, TrainConfig::with_alpha(case.alpha)).expect("every class is present")
}

pub fn check_normalization(case: &Case) -> Result<(), TestCaseError> {
    let p = predict(&model_of(case), &case.probe).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let sum: f64 = p.posterior.iter().sum();
    prop_assert!((sum - 1.0).abs() <= 1e-9, "posterior sums to {sum}");
    prop_assert!(p.posterior.iter().all(|x| (0.0..=1.0).contains(x)));
    Ok(())
}

/// Meant for categorical cases: Gaussian log densities can differ by more
/// than `exp` resolves, which legitimately rounds a posterior to 0.
pub fn check_positivity(case: &Case) -> Result<(), TestCaseError> {
    let p = predict(&model_of(case), &case.probe).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(p.posterior.iter().all(|&x| x > 0.0), "{:?}", p.posterior);
    Ok(())
}

pub fn check_permutation_invariance(case: &Case, permutation: &[usize]) -> Result<(), TestCaseError> {
    let shuffled = case.dataset.subset(permutation);
    let config = TrainConfig::with_alpha(case.alpha);
    let a = serialize(&train(&case.dataset, config).unwrap());
    let b = serialize(&train(&shuffled, config).unwrap());
    prop_assert_eq!(a, b);
    Ok(())
}

/// A missing attribute contributes nothing: the posterior equals, bit for
/// bit, that of a model trained without the attribute at all.
pub fn check_omission(case: &Case, drop: usize) -> Result<(), TestCaseError> {
    let j = drop % case.shapes.len();
    let name = attr_name(j);
    let schema = case.dataset.schema();
    let reduced_attrs: Vec<AttributeSpec> = schema
        .attributes()
        .iter()
        .filter(|a| a.name != name)
        .cloned()
        .collect();
    let reduced_schema = AttributeSchema::new(
        schema.class_attribute(),
        schema.class_labels().to_vec(),
        reduced_attrs,
    )
    .unwrap();
    let strip = |i: &Instance| {
        let mut i = i.clone();
        i.set(name.clone(), Value::Missing);
        i
    };
    let reduced = Dataset::new(
        reduced_schema,
        case.dataset.instances().iter().map(strip).collect(),
    )
    .unwrap();
    let config = TrainConfig::with_alpha(case.alpha);
    let full = train(&case.dataset, config).unwrap();
    let small = train(&reduced, config).unwrap();
    let probe = strip(&case.probe);
    let a = predict(&full, &probe).unwrap();
    let b = predict(&small, &probe).unwrap();
    prop_assert_eq!(a.posterior, b.posterior);
    prop_assert_eq!(a.label, b.label);
    Ok(())
}

/// Adding an observation of `a = v` in class `c` never lowers `P(v | c)` and
/// never raises `P(w | c)` for the other observed values `w`.
pub fn check_count_monotonicity(case: &Case, pick: usize) -> Result<(), TestCaseError> {
    let model = model_of(case);
    let schema = case.dataset.schema();
    let categorical: Vec<usize> = case
        .shapes
        .iter()
        .enumerate()
        .filter_map(|(j, s)| matches!(s, Shape::Categorical(_)).then_some(j))
        .collect();
    if categorical.is_empty() {
        return Ok(());
    }
    let name = attr_name(categorical[pick % categorical.len()]);
    let vocabulary = model.vocabulary(&name).unwrap().to_vec();
    if vocabulary.is_empty() {
        return Ok(());
    }
    let v = &vocabulary[(pick / 7) % vocabulary.len()];
    let class = &schema.class_labels()[(pick / 3) % schema.n_classes()];

    let mut rows = case.dataset.instances().to_vec();
    rows.push(Instance::new().with(name.clone(), v.as_str()).with_label(class.clone()));
    let bigger = train(
        &Dataset::new(schema.clone(), rows).unwrap(),
        TrainConfig::with_alpha(case.alpha),
    )
    .unwrap();
    for w in &vocabulary {
        let before = model.likelihood_categorical(&name, w, class).unwrap();
        let after = bigger.likelihood_categorical(&name, w, class).unwrap();
        if w == v {
            prop_assert!(after >= before, "P({w}|{class}) fell from {before} to {after}");
        } else {
            prop_assert!(after <= before, "P({w}|{class}) rose from {before} to {after}");
        }
    }
    Ok(())
}

pub fn check_single_scan(case: &Case) -> Result<(), TestCaseError> {
    let schema = case.dataset.schema();
    let mut trainer = Trainer::new(schema, TrainConfig::with_alpha(case.alpha)).unwrap();
    for instance in case.dataset.instances() {
        trainer.observe(instance).unwrap();
    }
    prop_assert_eq!(trainer.visits(), case.dataset.len());
    let streamed = trainer.finish().unwrap();
    prop_assert_eq!(streamed, model_of(case));
    Ok(())
}

pub fn check_fold_spread(case: &Case, k: usize, seed: u64) -> Result<(), TestCaseError> {
    let folds = stratified_folds(&case.dataset, k, seed).unwrap();
    let classes = case.dataset.class_indices().unwrap();
    for c in 0..case.dataset.schema().n_classes() {
        let mut per_fold = vec![0usize; k];
        for (i, &f) in folds.fold_of.iter().enumerate() {
            if classes[i] == c {
                per_fold[f] += 1;
            }
        }
        let spread = per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap();
        prop_assert!(spread <= 1, "class {c}: {per_fold:?}");
    }
    Ok(())
}

pub fn check_round_trip(case: &Case) -> Result<(), TestCaseError> {
    let model = model_of(case);
    let text = serialize(&model);
    let loaded = deserialize(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&serialize(&loaded), &text);
    prop_assert_eq!(fingerprint(&loaded), fingerprint(&model));
    prop_assert_eq!(predict(&loaded, &case.probe).unwrap(), predict(&model, &case.probe).unwrap());
    for instance in case.dataset.instances() {
        let x = instance.unlabeled();
        prop_assert_eq!(predict(&loaded, &x).unwrap(), predict(&model, &x).unwrap());
    }
    Ok(())
}
