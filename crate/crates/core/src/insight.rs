//! Descriptive output: single-evidence rules, mutual-information attribute
//! rankings and what-if perturbations.
//!
//! A rule `IF a=v THEN c` carries the model's posterior for `c` given only
//! `a = v`, so its confidence always agrees with [`predict`]. What-if deltas
//! are differences of model conditionals, not causal effects.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::classifier::{predict, FeatureModel, NaiveBayesModel, Prediction};
use crate::data::{schema_check_value, value_to_json, AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Rule {
    pub attribute: String,
    pub value: String,
    pub class: String,
    pub confidence: f64,
    /// Training rows with `attribute = value`.
    pub support: u64,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IF {}={} THEN {}  (confidence={:.4}, support={})",
            self.attribute, self.value, self.class, self.confidence, self.support
        )
    }
}

/// One rule per (categorical attribute, observed value), strongest first.
/// Equal confidences keep schema attribute order, then vocabulary order.
pub fn extract_rules(model: &NaiveBayesModel) -> Vec<Rule> {
    let schema = model.schema();
    let mut rules = Vec::new();
    for (spec, feature) in schema.attributes().iter().zip(model.features()) {
        let FeatureModel::Categorical {
            vocabulary, counts, ..
        } = feature
        else {
            continue;
        };
        for value in vocabulary {
            let evidence = Instance::new().with(spec.name.clone(), value.as_str());
            let prediction =
                predict(model, &evidence).expect("vocabulary values are valid evidence");
            let best = schema
                .class_index(&prediction.label)
                .expect("predicted label is declared");
            rules.push(Rule {
                attribute: spec.name.clone(),
                value: value.clone(),
                class: prediction.label.clone(),
                confidence: prediction.posterior[best],
                support: counts.iter().map(|m| m.get(value).copied().unwrap_or(0)).sum(),
            });
        }
    }
    rules.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    rules
}

/// Shannon entropy in bits of a count vector.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Mutual information in bits of a contingency table (`joint[row][col]`)
/// under its empirical joint distribution, with `0 log 0 = 0`.
pub fn mutual_information_bits(joint: &[Vec<u64>]) -> f64 {
    let total: u64 = joint.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let cols = joint.iter().map(Vec::len).max().unwrap_or(0);
    let row_sums: Vec<u64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols)
        .map(|j| joint.iter().map(|r| r.get(j).copied().unwrap_or(0)).sum())
        .collect();
    let mut mi = 0.0;
    for (r, row) in joint.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            // p(a,c) / (p(a) p(c)) = count * n / (row * col)
            let ratio = (count as f64 * n) / (row_sums[r] as f64 * col_sums[j] as f64);
            mi += (count as f64 / n) * ratio.log2();
        }
    }
    mi.max(0.0)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InfluenceEntry {
    pub attribute: String,
    pub mutual_information: f64,
}

/// Attributes ordered by mutual information with the class, descending;
/// ties keep schema order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InfluenceRanking {
    pub entries: Vec<InfluenceEntry>,
}

impl Serialize for InfluenceRanking {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl InfluenceRanking {
    fn from_scores(mut entries: Vec<InfluenceEntry>) -> Self {
        entries.sort_by(|a, b| b.mutual_information.total_cmp(&a.mutual_information));
        Self { entries }
    }

    pub fn get(&self, attribute: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.attribute == attribute)
            .map(|e| e.mutual_information)
    }
}

impl fmt::Display for InfluenceRanking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (rank, e) in self.entries.iter().enumerate() {
            writeln!(
                f,
                "{:>3}. {:<24} {:.4} bits",
                rank + 1,
                e.attribute,
                e.mutual_information
            )?;
        }
        Ok(())
    }
}

pub const NUMERIC_INFLUENCE_BINS: usize = 4;

/// Equal-frequency bin edges: the sorted values at ranks `q * m / bins`.
/// A value falls in the bin given by the number of edges it reaches, so
/// equal values always share a bin.
fn bin_edges(values: &mut [f64], bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    (1..bins).map(|q| values[q * m / bins]).collect()
}

/// Rank every predictor by `I(A; C)` over the rows where `A` is present.
/// Numeric attributes are first cut into four equal-frequency bins.
pub fn attribute_influence(dataset: &Dataset) -> Result<InfluenceRanking> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = dataset.class_indices()?;
    let k = dataset.schema().n_classes();
    let mut entries = Vec::new();
    for spec in dataset.schema().attributes() {
        let joint: Vec<Vec<u64>> = match spec.kind {
            AttributeKind::Categorical => {
                let mut table: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
                for (instance, &c) in dataset.instances().iter().zip(&classes) {
                    if let Some(v) = instance.get(&spec.name).as_category() {
                        table.entry(v).or_insert_with(|| vec![0; k])[c] += 1;
                    }
                }
                table.into_values().collect()
            }
            AttributeKind::Numeric => {
                let samples: Vec<(f64, usize)> = dataset
                    .instances()
                    .iter()
                    .zip(&classes)
                    .filter_map(|(i, &c)| i.get(&spec.name).as_number().map(|x| (x, c)))
                    .collect();
                if samples.is_empty() {
                    Vec::new()
                } else {
                    let mut xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
                    let edges = bin_edges(&mut xs, NUMERIC_INFLUENCE_BINS);
                    let mut table = vec![vec![0; k]; NUMERIC_INFLUENCE_BINS];
                    for (x, c) in samples {
                        let bin = edges.iter().filter(|&&e| x >= e).count();
                        table[bin][c] += 1;
                    }
                    table
                }
            }
        };
        entries.push(InfluenceEntry {
            attribute: spec.name.clone(),
            mutual_information: mutual_information_bits(&joint),
        });
    }
    Ok(InfluenceRanking::from_scores(entries))
}

/// The same ranking computed from a model's count tables. The tables hold the
/// unsmoothed joint counts over non-missing rows, so categorical scores
/// equal [`attribute_influence`] on the training data. Numeric attributes
/// are not ranked because the model keeps only their moments.
pub fn model_influence(model: &NaiveBayesModel) -> InfluenceRanking {
    let mut entries = Vec::new();
    for (spec, feature) in model.schema().attributes().iter().zip(model.features()) {
        if let FeatureModel::Categorical {
            vocabulary, counts, ..
        } = feature
        {
            let joint: Vec<Vec<u64>> = vocabulary
                .iter()
                .map(|v| counts.iter().map(|m| m.get(v).copied().unwrap_or(0)).collect())
                .collect();
            entries.push(InfluenceEntry {
                attribute: spec.name.clone(),
                mutual_information: mutual_information_bits(&joint),
            });
        }
    }
    InfluenceRanking::from_scores(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhatIfResult {
    pub attribute: String,
    pub old_value: Value,
    pub new_value: Value,
    pub before: Prediction,
    pub after: Prediction,
    /// `after.posterior - before.posterior`, in declared class order.
    pub delta: Vec<f64>,
}

impl WhatIfResult {
    pub fn delta_of(&self, class: &str) -> Option<f64> {
        let i = self.before.classes.iter().position(|c| c == class)?;
        Some(self.delta[i])
    }
}

impl Serialize for WhatIfResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let delta: BTreeMap<&str, f64> = self
            .before
            .classes
            .iter()
            .map(String::as_str)
            .zip(self.delta.iter().copied())
            .collect();
        let mut s = serializer.serialize_struct("WhatIfResult", 6)?;
        s.serialize_field("after", &self.after)?;
        s.serialize_field("attribute", &self.attribute)?;
        s.serialize_field("before", &self.before)?;
        s.serialize_field("delta", &delta)?;
        s.serialize_field("new_value", &value_to_json(&self.new_value))?;
        s.serialize_field("old_value", &value_to_json(&self.old_value))?;
        s.end()
    }
}

/// Predict `instance` before and after setting `attribute` to `new_value`.
/// `new_value` may be [`Value::Missing`], which drops the evidence.
pub fn what_if(
    model: &NaiveBayesModel,
    instance: &Instance,
    attribute: &str,
    new_value: Value,
) -> Result<WhatIfResult> {
    let spec = model
        .schema()
        .attribute(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    schema_check_value(spec, &new_value)?;

    let before = predict(model, instance)?;
    let mut changed = instance.clone();
    changed.set(attribute, new_value.clone());
    let after = predict(model, &changed)?;
    let delta = after
        .posterior
        .iter()
        .zip(&before.posterior)
        .map(|(a, b)| a - b)
        .collect();
    Ok(WhatIfResult {
        attribute: attribute.to_string(),
        old_value: instance.get(attribute).clone(),
        new_value,
        before,
        after,
        delta,
    })
}
