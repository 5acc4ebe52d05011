use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::{FeatureModel, NaiveBayesModel};
use crate::data::{schema_check_value, Instance, Value};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

pub fn gaussian_density(mean: f64, variance: f64, x: f64) -> f64 {
    let d = x - mean;
    (-(d * d) / (2.0 * variance)).exp() / (std::f64::consts::TAU * variance).sqrt()
}

pub fn gaussian_log_density(mean: f64, variance: f64, x: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + variance.ln()) - (d * d) / (2.0 * variance)
}

/// Normalized posterior over the class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Argmax class; exact ties go to the earliest declared class.
    pub label: String,
    /// Class labels in declared order; `posterior` and `log_scores` align.
    pub classes: Vec<String>,
    pub posterior: Vec<f64>,
    /// Unnormalized log joint `ln P(c) + sum ln P(x_j | c)`.
    pub log_scores: Vec<f64>,
}

impl Prediction {
    pub fn posterior_of(&self, class: &str) -> Option<f64> {
        let i = self.classes.iter().position(|c| c == class)?;
        Some(self.posterior[i])
    }

    pub fn posterior_map(&self) -> BTreeMap<&str, f64> {
        self.classes
            .iter()
            .map(String::as_str)
            .zip(self.posterior.iter().copied())
            .collect()
    }

    fn log_score_map(&self) -> BTreeMap<&str, f64> {
        self.classes
            .iter()
            .map(String::as_str)
            .zip(self.log_scores.iter().copied())
            .collect()
    }
}

impl Serialize for Prediction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Prediction", 3)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("log_scores", &self.log_score_map())?;
        s.serialize_field("posterior", &self.posterior_map())?;
        s.end()
    }
}

impl NaiveBayesModel {
    /// Log-likelihood contribution of one attribute for class `c`, or `None`
    /// when the attribute is omitted.
    ///
    /// Missing values are omitted. A numeric attribute is also omitted
    /// when some class had no non-missing samples for it, since its density
    /// for that class is undefined.
    fn log_term(&self, i: usize, value: &Value, c: usize) -> Option<f64> {
        match (&self.features()[i], value) {
            (_, Value::Missing) => None,
            (FeatureModel::Categorical { .. }, Value::Category(v)) => {
                Some(self.categorical_term(i, v, c).ln())
            }
            (FeatureModel::Numeric { params }, Value::Number(x)) => {
                if params.iter().any(|p| p.count == 0) {
                    return None;
                }
                let p = params[c];
                Some(gaussian_log_density(p.mean, p.variance, *x))
            }
            _ => unreachable!("instance kinds are validated before scoring"),
        }
    }

    fn validate_evidence(&self, instance: &Instance) -> Result<()> {
        for (name, value) in instance.values() {
            let spec = self
                .schema()
                .attribute(name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
            schema_check_value(spec, value)?;
        }
        Ok(())
    }
}

/// Posterior over classes for `instance`. Any label on the instance is ignored.
pub fn predict(model: &NaiveBayesModel, instance: &Instance) -> Result<Prediction> {
    model.validate_evidence(instance)?;
    let schema = model.schema();
    let k = schema.n_classes();

    let mut log_scores: Vec<f64> = model
        .class_counts()
        .iter()
        .map(|&count| (count as f64 / model.n() as f64).ln())
        .collect();
    for (i, spec) in schema.attributes().iter().enumerate() {
        let value = instance.get(&spec.name);
        if value.is_missing() {
            continue;
        }
        for (c, score) in log_scores.iter_mut().enumerate() {
            if let Some(term) = model.log_term(i, value, c) {
                *score += term;
            }
        }
    }

    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateEvidence);
    }
    let weights: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let posterior: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let mut best = 0;
    for c in 1..k {
        if posterior[c] > posterior[best] {
            best = c;
        }
    }

    Ok(Prediction {
        label: schema.class_labels()[best].clone(),
        classes: schema.class_labels().to_vec(),
        posterior,
        log_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, TrainConfig};
    use crate::data::{load_dataset, parse_schema, AttributeSchema, AttributeSpec, Dataset};
    use approx::assert_abs_diff_eq;

    fn ds6_model() -> NaiveBayesModel {
        let schema = parse_schema(include_str!("../../../../fixtures/ds6.schema.json")).unwrap();
        let ds = load_dataset(include_str!("../../../../fixtures/ds6.csv"), &schema, true).unwrap();
        train(&ds, TrainConfig::default()).unwrap()
    }

    // Frozen from oracle/ds6_oracle.py (exact rationals).
    const GOOD_HIGH_JUNIOR: f64 = 64.0 / 91.0;
    const GOOD_HIGH_MISSING: f64 = 16.0 / 19.0;

    #[test]
    fn categorical_likelihoods_match_oracle() {
        let m = ds6_model();
        assert_eq!(m.likelihood_categorical("skill", "high", "good").unwrap(), 4.0 / 6.0);
        assert_eq!(m.likelihood_categorical("skill", "high", "poor").unwrap(), 1.0 / 4.0);
        assert_eq!(m.likelihood_categorical("skill", "medium", "good").unwrap(), 1.0 / 6.0);
        assert_eq!(m.likelihood_categorical("skill", "medium", "poor").unwrap(), 1.0 / 4.0);
    }

    #[test]
    fn likelihood_lookup_errors() {
        let m = ds6_model();
        assert_eq!(
            m.likelihood_categorical("charisma", "x", "good").unwrap_err(),
            Error::UnknownAttribute("charisma".into())
        );
        assert!(matches!(
            m.likelihood_gaussian("skill", 1.0, "good"),
            Err(Error::KindMismatch { .. })
        ));
        assert_eq!(
            m.likelihood_categorical("skill", "high", "great").unwrap_err(),
            Error::UnknownClass("great".into())
        );
    }

    #[test]
    fn density_closed_forms() {
        assert_abs_diff_eq!(gaussian_density(0.0, 1.0, 0.0), 0.398_942_280_401_432_7, epsilon = 1e-15);
        assert_abs_diff_eq!(gaussian_density(0.0, 1.0, 1.0), 0.241_970_724_519_143_37, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gaussian_log_density(2.0, 3.0, -1.0),
            gaussian_density(2.0, 3.0, -1.0).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ds6_high_junior() {
        let p = predict(&ds6_model(), &Instance::new().with("skill", "high").with("experience", "junior"))
            .unwrap();
        assert_eq!(p.label, "good");
        assert_abs_diff_eq!(p.posterior_of("good").unwrap(), GOOD_HIGH_JUNIOR, epsilon = 1e-12);
        assert_abs_diff_eq!(p.posterior_of("poor").unwrap(), 27.0 / 91.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.log_scores[0], (4.0_f64 / 27.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn ds6_missing_experience_is_omitted() {
        let p = predict(&ds6_model(), &Instance::new().with("skill", "high")).unwrap();
        assert_abs_diff_eq!(p.posterior_of("good").unwrap(), GOOD_HIGH_MISSING, epsilon = 1e-12);
    }

    #[test]
    fn all_missing_with_equal_priors_is_uniform() {
        let schema = parse_schema(include_str!("../../../../fixtures/ds6.schema.json")).unwrap();
        let ds = load_dataset(
            "skill,experience,performance\nhigh,senior,good\nlow,junior,poor\n",
            &schema,
            true,
        )
        .unwrap();
        let m = train(&ds, TrainConfig::default()).unwrap();
        let p = predict(&m, &Instance::new()).unwrap();
        assert_eq!(p.posterior, vec![0.5, 0.5]);
        assert_eq!(p.label, "good");
    }

    #[test]
    fn rejects_unknown_attributes_and_kinds() {
        let m = ds6_model();
        assert_eq!(
            predict(&m, &Instance::new().with("charisma", "high")).unwrap_err(),
            Error::UnknownAttribute("charisma".into())
        );
        assert!(matches!(
            predict(&m, &Instance::new().with("skill", 3.0)),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn numeric_attribute_scoring() {
        let schema = AttributeSchema::new(
            "c",
            vec!["a".into(), "b".into()],
            vec![AttributeSpec::numeric("x")],
        )
        .unwrap();
        let rows = [(0.0, "a"), (1.0, "a"), (2.0, "a"), (10.0, "b"), (12.0, "b")];
        let ds = Dataset::new(
            schema,
            rows.iter().map(|&(x, c)| Instance::new().with("x", x).with_label(c)).collect(),
        )
        .unwrap();
        let m = train(&ds, TrainConfig::default()).unwrap();
        let p = predict(&m, &Instance::new().with("x", 1.5)).unwrap();
        assert_eq!(p.label, "a");
        let expected_a = (0.6_f64).ln() + gaussian_log_density(1.0, 1.0, 1.5);
        assert_abs_diff_eq!(p.log_scores[0], expected_a, epsilon = 1e-12);
        let p = predict(&m, &Instance::new().with("x", 11.0)).unwrap();
        assert_eq!(p.label, "b");
    }

    #[test]
    fn prediction_serializes_as_maps() {
        let p = predict(&ds6_model(), &Instance::new().with("skill", "high")).unwrap();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["label"], "good");
        assert_eq!(json["posterior"]["good"].as_f64().unwrap(), p.posterior[0]);
        assert!(json["log_scores"]["poor"].is_number());
    }
}
