//! Versioned, canonical model documents.
//!
//! Only counts and fitted Gaussian moments are stored; probabilities are
//! recomputed on load. Keys are sorted and reals use the shortest
//! round-trip form, so equal models serialize to equal bytes and a loaded
//! model predicts bit-identically to the one that was saved.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FeatureModel, GaussianParams, NaiveBayesModel, TrainConfig};
use crate::canonical::to_canonical_string;
use crate::data::{AttributeKind, AttributeSchema};
use crate::error::{Error, Result};

pub const MODEL_VERSION: u64 = 1;

type CountTable = BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    version: u64,
    config: TrainConfig,
    schema: AttributeSchema,
    n: u64,
    class_counts: BTreeMap<String, u64>,
    categorical_counts: CountTable,
    gaussian_params: BTreeMap<String, BTreeMap<String, GaussianParams>>,
    vocabulary: BTreeMap<String, Vec<String>>,
}

pub fn serialize(model: &NaiveBayesModel) -> String {
    let schema = model.schema();
    let labels = schema.class_labels();
    let mut categorical_counts = CountTable::new();
    let mut gaussian_params = BTreeMap::new();
    let mut vocabulary_doc = BTreeMap::new();

    for (spec, feature) in schema.attributes().iter().zip(model.features()) {
        match feature {
            FeatureModel::Categorical {
                vocabulary, counts, ..
            } => {
                let per_class = labels.iter().cloned().zip(counts.iter().cloned()).collect();
                categorical_counts.insert(spec.name.clone(), per_class);
                vocabulary_doc.insert(spec.name.clone(), vocabulary.clone());
            }
            FeatureModel::Numeric { params } => {
                let per_class = labels.iter().cloned().zip(params.iter().copied()).collect();
                gaussian_params.insert(spec.name.clone(), per_class);
            }
        }
    }

    let doc = ModelDocument {
        version: MODEL_VERSION,
        config: *model.config(),
        schema: schema.clone(),
        n: model.n(),
        class_counts: labels
            .iter()
            .cloned()
            .zip(model.class_counts().iter().copied())
            .collect(),
        categorical_counts,
        gaussian_params,
        vocabulary: vocabulary_doc,
    };
    to_canonical_string(&doc)
}

/// Hex SHA-256 of the canonical serialization.
pub fn fingerprint(model: &NaiveBayesModel) -> String {
    hex::encode(Sha256::digest(serialize(model).as_bytes()))
}

fn invariant(message: impl Into<String>) -> Error {
    Error::ModelInvariant(message.into())
}

fn exact_keys<V>(map: &BTreeMap<String, V>, expected: &[&str], what: &str) -> Result<()> {
    let got: BTreeSet<&str> = map.keys().map(String::as_str).collect();
    let want: BTreeSet<&str> = expected.iter().copied().collect();
    if got != want {
        return Err(invariant(format!("{what}: keys {got:?}, expected {want:?}")));
    }
    Ok(())
}

pub fn deserialize(text: &str) -> Result<NaiveBayesModel> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
    let version = raw
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::MalformedModel("missing integer \"version\"".into()))?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedModelVersion(version));
    }
    let doc: ModelDocument =
        serde_json::from_value(raw).map_err(|e| Error::MalformedModel(e.to_string()))?;
    doc.config.validate().map_err(|e| invariant(e.to_string()))?;

    let schema = doc.schema;
    let labels: Vec<&str> = schema.class_labels().iter().map(String::as_str).collect();

    exact_keys(&doc.class_counts, &labels, "class_counts")?;
    let class_counts: Vec<u64> = labels.iter().map(|l| doc.class_counts[*l]).collect();
    if let Some(c) = class_counts.iter().position(|&n| n == 0) {
        return Err(invariant(format!("class {:?} has zero training instances", labels[c])));
    }
    if class_counts.iter().sum::<u64>() != doc.n {
        return Err(invariant("class counts do not sum to n"));
    }

    let names_of = |kind: AttributeKind| -> Vec<&str> {
        schema
            .attributes()
            .iter()
            .filter(|a| a.kind == kind)
            .map(|a| a.name.as_str())
            .collect()
    };
    let categorical = names_of(AttributeKind::Categorical);
    let numeric = names_of(AttributeKind::Numeric);
    exact_keys(&doc.vocabulary, &categorical, "vocabulary")?;
    exact_keys(&doc.categorical_counts, &categorical, "categorical_counts")?;
    exact_keys(&doc.gaussian_params, &numeric, "gaussian_params")?;

    let mut features = Vec::with_capacity(schema.attributes().len());
    for spec in schema.attributes() {
        let name = spec.name.as_str();
        let feature = match spec.kind {
            AttributeKind::Categorical => {
                let vocabulary = doc.vocabulary[name].clone();
                if vocabulary.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invariant(format!(
                        "vocabulary of {name:?} is not sorted and duplicate-free"
                    )));
                }
                let table = &doc.categorical_counts[name];
                exact_keys(table, &labels, &format!("categorical_counts.{name}"))?;
                let mut counts = Vec::with_capacity(labels.len());
                let mut present = Vec::with_capacity(labels.len());
                for (c, label) in labels.iter().enumerate() {
                    let per_value = table[*label].clone();
                    for value in per_value.keys() {
                        if vocabulary.binary_search(value).is_err() {
                            return Err(invariant(format!(
                                "value {value:?} of {name:?} is counted but not in the vocabulary"
                            )));
                        }
                    }
                    let sum: u64 = per_value.values().sum();
                    if sum > class_counts[c] {
                        return Err(invariant(format!(
                            "counts of {name:?} for {label:?} exceed the class count"
                        )));
                    }
                    present.push(sum);
                    counts.push(per_value);
                }
                FeatureModel::Categorical {
                    vocabulary,
                    counts,
                    present,
                }
            }
            AttributeKind::Numeric => {
                let table = &doc.gaussian_params[name];
                exact_keys(table, &labels, &format!("gaussian_params.{name}"))?;
                let mut params = Vec::with_capacity(labels.len());
                for (c, label) in labels.iter().enumerate() {
                    let p = table[*label];
                    if !p.mean.is_finite()
                        || !p.variance.is_finite()
                        || p.variance < doc.config.variance_floor
                    {
                        return Err(invariant(format!(
                            "gaussian parameters of {name:?} for {label:?} are invalid"
                        )));
                    }
                    if p.count > class_counts[c] {
                        return Err(invariant(format!(
                            "sample count of {name:?} for {label:?} exceeds the class count"
                        )));
                    }
                    params.push(p);
                }
                FeatureModel::Numeric { params }
            }
        };
        features.push(feature);
    }

    Ok(NaiveBayesModel {
        schema,
        config: doc.config,
        n: doc.n,
        class_counts,
        features,
    })
}
