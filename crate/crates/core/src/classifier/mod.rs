//! Naive Bayes over mixed categorical and numeric attributes.
//!
//! Categorical likelihoods are Laplace-smoothed count ratios
//!
//! ```text
//! P(v | c) = (count(v, c) + alpha) / (present(c) + alpha * V)
//! ```
//!
//! where `present(c)` counts class-`c` rows with a non-missing value and `V`
//! is the size of the vocabulary observed in training. Numeric attributes use
//! a per-class normal density. Missing values contribute no factor at all.

mod persist;
mod predict;
mod train;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use persist::{deserialize, fingerprint, serialize, MODEL_VERSION};
pub use predict::{gaussian_density, gaussian_log_density, predict, Prediction};
pub use train::{train, Trainer};

use crate::data::{AttributeKind, AttributeSchema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Laplace pseudo-count for categorical likelihoods.
    pub alpha: f64,
    /// Lower bound on every fitted variance.
    pub variance_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            variance_floor: 1e-9,
        }
    }
}

impl TrainConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.variance_floor.is_finite() && self.variance_floor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "variance_floor must be finite and > 0, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub mean: f64,
    pub variance: f64,
    /// Non-missing samples the estimate is based on.
    pub count: u64,
}

/// Per-attribute sufficient statistics, indexed by class.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum FeatureModel {
    Categorical {
        /// Sorted, duplicate-free.
        vocabulary: Vec<String>,
        counts: Vec<BTreeMap<String, u64>>,
        present: Vec<u64>,
    },
    Numeric {
        params: Vec<GaussianParams>,
    },
}

/// A trained classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    schema: AttributeSchema,
    config: TrainConfig,
    n: u64,
    class_counts: Vec<u64>,
    features: Vec<FeatureModel>,
}

impl NaiveBayesModel {
    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Training instances seen.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    /// Maximum-likelihood priors `class_count / n`, in declared class order.
    pub fn priors(&self) -> Vec<f64> {
        self.class_counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }

    /// Observed vocabulary of a categorical attribute, sorted.
    pub fn vocabulary(&self, attribute: &str) -> Option<&[String]> {
        let i = self.schema.attribute_index(attribute)?;
        match &self.features[i] {
            FeatureModel::Categorical { vocabulary, .. } => Some(vocabulary),
            FeatureModel::Numeric { .. } => None,
        }
    }

    /// Training count of `value` among class `class` rows.
    pub fn value_count(&self, attribute: &str, value: &str, class: &str) -> Result<u64> {
        let (i, c) = self.categorical_lookup(attribute, class)?;
        match &self.features[i] {
            FeatureModel::Categorical { counts, .. } => Ok(counts[c].get(value).copied().unwrap_or(0)),
            FeatureModel::Numeric { .. } => unreachable!("checked by categorical_lookup"),
        }
    }

    pub fn gaussian_params(&self, attribute: &str, class: &str) -> Result<GaussianParams> {
        let i = self
            .schema
            .attribute_index(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        let c = self.class_index(class)?;
        match &self.features[i] {
            FeatureModel::Numeric { params } => Ok(params[c]),
            FeatureModel::Categorical { .. } => Err(Error::KindMismatch {
                attribute: attribute.to_string(),
                expected: AttributeKind::Categorical.as_str(),
            }),
        }
    }

    pub(crate) fn features(&self) -> &[FeatureModel] {
        &self.features
    }

    fn class_index(&self, class: &str) -> Result<usize> {
        self.schema
            .class_index(class)
            .ok_or_else(|| Error::UnknownClass(class.to_string()))
    }

    fn categorical_lookup(&self, attribute: &str, class: &str) -> Result<(usize, usize)> {
        let i = self
            .schema
            .attribute_index(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        if let FeatureModel::Numeric { .. } = self.features[i] {
            return Err(Error::KindMismatch {
                attribute: attribute.to_string(),
                expected: AttributeKind::Numeric.as_str(),
            });
        }
        Ok((i, self.class_index(class)?))
    }

    /// Smoothed `P(attribute = value | class)`; an unseen value gets count 0
    /// over the unchanged denominator.
    pub fn likelihood_categorical(&self, attribute: &str, value: &str, class: &str) -> Result<f64> {
        let (i, c) = self.categorical_lookup(attribute, class)?;
        Ok(self.categorical_term(i, value, c))
    }

    /// Normal density of `x` under the fitted `(mean, variance)` for `class`.
    pub fn likelihood_gaussian(&self, attribute: &str, x: f64, class: &str) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidValue {
                attribute: attribute.to_string(),
                message: format!("{x} is not finite"),
            });
        }
        let p = self.gaussian_params(attribute, class)?;
        Ok(gaussian_density(p.mean, p.variance, x))
    }

    /// Linear-space smoothed ratio for attribute index `i`, class index `c`.
    ///
    /// The degenerate cases only arise with `alpha == 0` or an attribute that
    /// was never observed: a zero denominator yields `1 / V` (or 1 when the
    /// vocabulary is empty), a factor that carries no class information.
    pub(crate) fn categorical_term(&self, i: usize, value: &str, c: usize) -> f64 {
        let FeatureModel::Categorical {
            vocabulary,
            counts,
            present,
        } = &self.features[i]
        else {
            panic!("categorical_term on a numeric attribute");
        };
        let alpha = self.config.alpha;
        let v = vocabulary.len() as f64;
        let count = counts[c].get(value).copied().unwrap_or(0) as f64;
        let denominator = present[c] as f64 + alpha * v;
        if denominator == 0.0 {
            return if vocabulary.is_empty() { 1.0 } else { 1.0 / v };
        }
        (count + alpha) / denominator
    }
}
