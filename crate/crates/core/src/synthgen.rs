//! Synthetic personnel data from a known naive Bayes generative model, and
//! the Bayes-optimal accuracy of that model.
//!
//! Row generation draws, per row and in this order: the class from
//! `class_priors`; then for each attribute in schema order its value
//! (categorical by inverse CDF over the declared values, numeric as
//! `mean + sqrt(variance) * standard_normal`), followed, when
//! `missing_rate > 0`, by one uniform that blanks the cell if it falls below
//! the rate. All draws come from [`SeededRng`], so output is a pure function
//! of the spec, `n` and the seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{AttributeKind, AttributeSchema, AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Largest joint configuration count enumerated exactly; beyond it
/// [`bayes_optimal_accuracy`] falls back to Monte Carlo.
pub const EXACT_ENUMERATION_LIMIT: u64 = 1 << 20;

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalParams {
    pub mean: f64,
    pub variance: f64,
}

/// A naive Bayes generative model over a schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerativeSpec {
    pub schema: AttributeSchema,
    /// One entry per class label, in declared order.
    pub class_priors: Vec<f64>,
    /// attribute -> class -> probabilities over the attribute's declared values.
    #[serde(default)]
    pub categorical: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// attribute -> class -> normal parameters.
    #[serde(default)]
    pub numeric: BTreeMap<String, BTreeMap<String, NormalParams>>,
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

enum Feature<'a> {
    Categorical {
        values: &'a [String],
        /// Per class.
        probabilities: Vec<&'a [f64]>,
    },
    Numeric {
        params: Vec<NormalParams>,
    },
}

/// The spec with every table resolved into schema and class order.
struct Compiled<'a> {
    spec: &'a GenerativeSpec,
    features: Vec<Feature<'a>>,
}

fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidSpec(message.into())
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid(format!("{what}: probabilities must be finite and non-negative")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(invalid(format!("{what}: probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

impl GenerativeSpec {
    /// Parse and validate a spec document.
    pub fn parse(text: &str) -> Result<Self> {
        let spec: GenerativeSpec =
            serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled<'_>> {
        let labels = self.schema.class_labels();
        if self.class_priors.len() != labels.len() {
            return Err(invalid(format!(
                "class_priors has {} entries for {} classes",
                self.class_priors.len(),
                labels.len()
            )));
        }
        check_distribution(&self.class_priors, "class_priors")?;
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(invalid(format!("missing_rate {} is outside [0, 1)", self.missing_rate)));
        }
        for name in self.categorical.keys().chain(self.numeric.keys()) {
            if self.schema.attribute(name).is_none() {
                return Err(invalid(format!("table for unknown attribute {name:?}")));
            }
        }

        let mut features = Vec::with_capacity(self.schema.attributes().len());
        for spec in self.schema.attributes() {
            let name = &spec.name;
            let feature = match spec.kind {
                AttributeKind::Categorical => {
                    let values = spec.declared_values.as_deref().ok_or_else(|| {
                        invalid(format!("categorical attribute {name:?} must declare its values"))
                    })?;
                    let table = self
                        .categorical
                        .get(name)
                        .ok_or_else(|| invalid(format!("no categorical table for {name:?}")))?;
                    if table.len() != labels.len() {
                        return Err(invalid(format!("table for {name:?} must cover exactly the classes")));
                    }
                    let mut probabilities = Vec::with_capacity(labels.len());
                    for label in labels {
                        let p = table
                            .get(label)
                            .ok_or_else(|| invalid(format!("{name:?} has no row for {label:?}")))?;
                        if p.len() != values.len() {
                            return Err(invalid(format!(
                                "{name:?} for {label:?} has {} probabilities for {} values",
                                p.len(),
                                values.len()
                            )));
                        }
                        check_distribution(p, &format!("{name}|{label}"))?;
                        probabilities.push(p.as_slice());
                    }
                    Feature::Categorical {
                        values,
                        probabilities,
                    }
                }
                AttributeKind::Numeric => {
                    if self.categorical.contains_key(name) {
                        return Err(invalid(format!("numeric attribute {name:?} has a categorical table")));
                    }
                    let table = self
                        .numeric
                        .get(name)
                        .ok_or_else(|| invalid(format!("no numeric table for {name:?}")))?;
                    if table.len() != labels.len() {
                        return Err(invalid(format!("table for {name:?} must cover exactly the classes")));
                    }
                    let mut params = Vec::with_capacity(labels.len());
                    for label in labels {
                        let p = *table
                            .get(label)
                            .ok_or_else(|| invalid(format!("{name:?} has no row for {label:?}")))?;
                        if !p.mean.is_finite() || !p.variance.is_finite() || p.variance <= 0.0 {
                            return Err(invalid(format!(
                                "{name:?} for {label:?} needs a finite mean and positive variance"
                            )));
                        }
                        params.push(p);
                    }
                    Feature::Numeric { params }
                }
            };
            features.push(feature);
        }
        if self.numeric.keys().any(|n| self.categorical.contains_key(n)) {
            return Err(invalid("an attribute has both categorical and numeric tables"));
        }
        Ok(Compiled {
            spec: self,
            features,
        })
    }

    /// The exact posterior over classes under the generating model, with
    /// missing cells omitted.
    pub fn true_posterior(&self, instance: &Instance) -> Result<Vec<f64>> {
        let compiled = self.compile()?;
        self.schema.check_instance(instance)?;
        Ok(compiled.posterior(instance))
    }
}

impl Compiled<'_> {
    fn sample(&self, rng: &mut SeededRng, correlation: f64) -> Instance {
        let spec = self.spec;
        let c = rng.categorical(&spec.class_priors);
        let labels = spec.schema.class_labels();
        let mut instance = Instance::new().with_label(labels[c].clone());
        let mut previous_index: Option<usize> = None;
        for (attr, feature) in spec.schema.attributes().iter().zip(&self.features) {
            let value = match feature {
                Feature::Categorical {
                    values,
                    probabilities,
                } => {
                    let mut index = rng.categorical(probabilities[c]);
                    if correlation > 0.0 {
                        if let Some(prev) = previous_index {
                            if rng.next_f64() < correlation {
                                index = prev % values.len();
                            }
                        }
                        previous_index = Some(index);
                    }
                    Value::Category(values[index].clone())
                }
                Feature::Numeric { params } => {
                    let p = params[c];
                    Value::Number(p.mean + p.variance.sqrt() * rng.standard_normal())
                }
            };
            let blank = spec.missing_rate > 0.0 && rng.next_f64() < spec.missing_rate;
            if !blank {
                instance.set(attr.name.clone(), value);
            }
        }
        instance
    }

    fn log_posterior_scores(&self, instance: &Instance) -> Vec<f64> {
        let spec = self.spec;
        let mut scores: Vec<f64> = spec.class_priors.iter().map(|p| p.ln()).collect();
        for (attr, feature) in spec.schema.attributes().iter().zip(&self.features) {
            match (feature, instance.get(&attr.name)) {
                (_, Value::Missing) => {}
                (Feature::Categorical { values, probabilities }, Value::Category(v)) => {
                    let index = values.iter().position(|x| x == v);
                    for (c, s) in scores.iter_mut().enumerate() {
                        *s += index.map_or(f64::NEG_INFINITY, |i| probabilities[c][i].ln());
                    }
                }
                (Feature::Numeric { params }, Value::Number(x)) => {
                    for (c, s) in scores.iter_mut().enumerate() {
                        let p = params[c];
                        *s += -0.5 * (2.0 * std::f64::consts::PI * p.variance).ln()
                            - (x - p.mean).powi(2) / (2.0 * p.variance);
                    }
                }
                _ => unreachable!("instance was checked against the schema"),
            }
        }
        scores
    }

    fn posterior(&self, instance: &Instance) -> Vec<f64> {
        let scores = self.log_posterior_scores(instance);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return vec![f64::NAN; scores.len()];
        }
        let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    fn argmax(&self, instance: &Instance) -> usize {
        let scores = self.log_posterior_scores(instance);
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        best
    }

    /// Joint configurations to enumerate, or `None` if a numeric attribute
    /// rules enumeration out.
    fn configuration_count(&self) -> Option<u64> {
        let extra = u64::from(self.spec.missing_rate > 0.0);
        self.features.iter().try_fold(1u64, |acc, f| match f {
            Feature::Categorical { values, .. } => acc.checked_mul(values.len() as u64 + extra),
            Feature::Numeric { .. } => None,
        })
    }

    /// `sum_x max_c P(c) P(x | c)` by depth-first enumeration.
    fn exact_accuracy(&self) -> f64 {
        let cats: Vec<&Vec<&[f64]>> = self
            .features
            .iter()
            .map(|f| match f {
                Feature::Categorical { probabilities, .. } => probabilities,
                Feature::Numeric { .. } => unreachable!("enumeration is categorical only"),
            })
            .collect();
        let rate = self.spec.missing_rate;
        let mut stack = vec![(0usize, self.spec.class_priors.clone())];
        let mut total = 0.0;
        while let Some((depth, weights)) = stack.pop() {
            if depth == cats.len() {
                total += weights.iter().copied().fold(0.0, f64::max);
                continue;
            }
            let table = cats[depth];
            if rate > 0.0 {
                stack.push((depth + 1, weights.iter().map(|w| w * rate).collect()));
            }
            for v in 0..table[0].len() {
                let next = weights
                    .iter()
                    .enumerate()
                    .map(|(c, w)| w * (1.0 - rate) * table[c][v])
                    .collect();
                stack.push((depth + 1, next));
            }
        }
        total
    }
}

/// Draw `n` labeled rows. `seed` overrides the spec's own seed.
pub fn generate(spec: &GenerativeSpec, n: usize, seed: u64) -> Result<Dataset> {
    generate_with_correlation(spec, n, seed, 0.0)
}

/// Like [`generate`], but each categorical cell after the first copies the
/// previous categorical cell's value index (modulo its arity) with
/// probability `correlation`. This breaks the independence the classifier
/// assumes and is meant for robustness demonstrations only.
pub fn generate_correlated(
    spec: &GenerativeSpec,
    n: usize,
    seed: u64,
    correlation: f64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&correlation) {
        return Err(invalid(format!("correlation {correlation} is outside [0, 1]")));
    }
    generate_with_correlation(spec, n, seed, correlation)
}

fn generate_with_correlation(
    spec: &GenerativeSpec,
    n: usize,
    seed: u64,
    correlation: f64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("row count must be at least 1"));
    }
    let compiled = spec.compile()?;
    let mut rng = SeededRng::new(seed);
    let instances = (0..n).map(|_| compiled.sample(&mut rng, correlation)).collect();
    Dataset::new(spec.schema.clone(), instances)
}

fn random_distribution(rng: &mut SeededRng, len: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..len).map(|_| 0.05 + rng.next_f64()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// A spec with random parameters: `arities[j]` values for categorical
/// attribute `cat{j}` and `numeric` Gaussian attributes `num{j}`.
///
/// Class labels are `class0, class1, ...`; every probability is at least
/// `0.05 / (1.05 len)`, means lie in `[-3, 3)` and variances in
/// `[0.5, 2)`.
pub fn random_spec(classes: usize, arities: &[usize], numeric: usize, seed: u64) -> Result<GenerativeSpec> {
    let mut rng = SeededRng::new(seed);
    let labels: Vec<String> = (0..classes).map(|c| format!("class{c}")).collect();
    let mut attributes = Vec::new();
    let mut categorical = BTreeMap::new();
    for (j, &arity) in arities.iter().enumerate() {
        let name = format!("cat{j}");
        let values: Vec<String> = (0..arity).map(|v| format!("v{v}")).collect();
        let refs: Vec<&str> = values.iter().map(String::as_str).collect();
        attributes.push(AttributeSpec::categorical(name.clone(), &refs));
        let table = labels
            .iter()
            .map(|l| (l.clone(), random_distribution(&mut rng, arity)))
            .collect();
        categorical.insert(name, table);
    }
    let mut numeric_tables = BTreeMap::new();
    for j in 0..numeric {
        let name = format!("num{j}");
        attributes.push(AttributeSpec::numeric(name.clone()));
        let table = labels
            .iter()
            .map(|l| {
                let mean = -3.0 + 6.0 * rng.next_f64();
                let variance = 0.5 + 1.5 * rng.next_f64();
                (l.clone(), NormalParams { mean, variance })
            })
            .collect();
        numeric_tables.insert(name, table);
    }
    let schema = AttributeSchema::new("class", labels, attributes)?;
    let spec = GenerativeSpec {
        schema,
        class_priors: random_distribution(&mut rng, classes),
        categorical,
        numeric: numeric_tables,
        missing_rate: 0.0,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BayesOptimal {
    pub accuracy: f64,
    /// 0 when computed exactly.
    pub std_error: f64,
    pub exact: bool,
}

/// Accuracy of the true-posterior argmax classifier under `spec`.
///
/// All-categorical specs with at most [`EXACT_ENUMERATION_LIMIT`] joint
/// configurations (counting "missing" as a state when `missing_rate > 0`)
/// are summed exactly. Otherwise `n_mc` rows are drawn with `seed` and the
/// argmax is scored against the drawn class.
pub fn bayes_optimal_accuracy(spec: &GenerativeSpec, n_mc: usize, seed: u64) -> Result<BayesOptimal> {
    if n_mc == 0 {
        return Err(invalid("Monte Carlo sample count must be at least 1"));
    }
    let compiled = spec.compile()?;
    if let Some(count) = compiled.configuration_count() {
        if count <= EXACT_ENUMERATION_LIMIT {
            return Ok(BayesOptimal {
                accuracy: compiled.exact_accuracy(),
                std_error: 0.0,
                exact: true,
            });
        }
    }
    let mut rng = SeededRng::new(seed);
    let labels = spec.schema.class_labels();
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let row = compiled.sample(&mut rng, 0.0);
        let truth = row.label().expect("generated rows are labeled");
        if labels[compiled.argmax(&row)] == truth {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    Ok(BayesOptimal {
        accuracy: p,
        std_error: (p * (1.0 - p) / n_mc as f64).sqrt(),
        exact: false,
    })
}
