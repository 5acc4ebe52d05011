use std::collections::{BTreeMap, BTreeSet};

use super::{FeatureModel, GaussianParams, NaiveBayesModel, TrainConfig};
use crate::data::{AttributeKind, AttributeSchema, Dataset, Instance, Value};
use crate::error::{Error, Result};

enum Accumulator {
    Categorical(Vec<BTreeMap<String, u64>>),
    Numeric(Vec<Vec<f64>>),
}

/// Streaming trainer: feed every labeled instance once, then [`finish`].
///
/// [`visits`] counts the records observed so callers can check that training
/// is a single pass over the data.
///
/// [`finish`]: Trainer::finish
/// [`visits`]: Trainer::visits
pub struct Trainer<'s> {
    schema: &'s AttributeSchema,
    config: TrainConfig,
    class_counts: Vec<u64>,
    accumulators: Vec<Accumulator>,
    visits: usize,
}

impl<'s> Trainer<'s> {
    pub fn new(schema: &'s AttributeSchema, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let k = schema.n_classes();
        let accumulators = schema
            .attributes()
            .iter()
            .map(|spec| match spec.kind {
                AttributeKind::Categorical => Accumulator::Categorical(vec![BTreeMap::new(); k]),
                AttributeKind::Numeric => Accumulator::Numeric(vec![Vec::new(); k]),
            })
            .collect();
        Ok(Self {
            schema,
            config,
            class_counts: vec![0; k],
            accumulators,
            visits: 0,
        })
    }

    pub fn visits(&self) -> usize {
        self.visits
    }

    pub fn observe(&mut self, instance: &Instance) -> Result<()> {
        self.visits += 1;
        let label = instance.label().ok_or(Error::Unlabeled)?;
        let c = self
            .schema
            .class_index(label)
            .ok_or_else(|| Error::UnknownClass(label.to_string()))?;
        self.class_counts[c] += 1;
        for (name, value) in instance.values() {
            let i = self
                .schema
                .attribute_index(name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
            match (&mut self.accumulators[i], value) {
                (Accumulator::Categorical(counts), Value::Category(v)) => {
                    *counts[c].entry(v.clone()).or_insert(0) += 1;
                }
                (Accumulator::Numeric(samples), Value::Number(x)) if x.is_finite() => {
                    samples[c].push(*x);
                }
                (Accumulator::Numeric(_), Value::Number(x)) => {
                    return Err(Error::InvalidValue {
                        attribute: name.to_string(),
                        message: format!("{x} is not finite"),
                    })
                }
                (_, Value::Missing) => {}
                (acc, _) => {
                    return Err(Error::KindMismatch {
                        attribute: name.to_string(),
                        expected: match acc {
                            Accumulator::Categorical(_) => "categorical",
                            Accumulator::Numeric(_) => "numeric",
                        },
                    })
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<NaiveBayesModel> {
        let n: u64 = self.class_counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Some(c) = self.class_counts.iter().position(|&count| count == 0) {
            return Err(Error::EmptyClass(self.schema.class_labels()[c].clone()));
        }
        let floor = self.config.variance_floor;
        let features = self
            .accumulators
            .into_iter()
            .map(|acc| match acc {
                Accumulator::Categorical(counts) => {
                    let vocabulary: BTreeSet<&String> =
                        counts.iter().flat_map(|m| m.keys()).collect();
                    let vocabulary = vocabulary.into_iter().cloned().collect();
                    let present = counts.iter().map(|m| m.values().sum()).collect();
                    FeatureModel::Categorical {
                        vocabulary,
                        counts,
                        present,
                    }
                }
                Accumulator::Numeric(samples) => FeatureModel::Numeric {
                    params: samples.into_iter().map(|s| fit_gaussian(s, floor)).collect(),
                },
            })
            .collect();
        Ok(NaiveBayesModel {
            schema: self.schema.clone(),
            config: self.config,
            n,
            class_counts: self.class_counts,
            features,
        })
    }
}

/// Mean and unbiased variance, computed over the sorted samples so the
/// result does not depend on the order rows arrived in.
fn fit_gaussian(mut samples: Vec<f64>, floor: f64) -> GaussianParams {
    samples.sort_by(f64::total_cmp);
    let count = samples.len();
    if count == 0 {
        return GaussianParams {
            mean: 0.0,
            variance: floor,
            count: 0,
        };
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    let variance = if count < 2 {
        floor
    } else {
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (count - 1) as f64).max(floor)
    };
    GaussianParams {
        mean,
        variance,
        count: count as u64,
    }
}

/// Fit a model with one pass over a labeled dataset.
pub fn train(dataset: &Dataset, config: TrainConfig) -> Result<NaiveBayesModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut trainer = Trainer::new(dataset.schema(), config)?;
    for instance in dataset.instances() {
        trainer.observe(instance)?;
    }
    debug_assert_eq!(trainer.visits(), dataset.len());
    trainer.finish()
}
