//! Confusion matrices, per-class metrics and stratified k-fold
//! cross-validation.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::classifier::{predict, NaiveBayesModel, TrainConfig, Trainer};
use crate::data::{stratified_folds, Dataset, Instance};
use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let k = labels.len();
        Self {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }
}

impl Serialize for ConfusionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ConfusionMatrix", 2)?;
        s.serialize_field("counts", &self.counts)?;
        s.serialize_field("labels", &self.labels)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True instances of the class.
    pub support: u64,
    /// Set when nothing was predicted as this class; precision is reported as 0.
    pub precision_undefined: bool,
    /// Set when the class never occurred; recall is reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub size: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SkippedFold {
    pub fold: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CrossValidationSummary {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub skipped: Vec<SkippedFold>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over evaluated folds; 0 with fewer than two.
    pub std_accuracy: f64,
    /// Classes with fewer instances than folds.
    pub undersized_classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    /// Declared class order.
    pub per_class: Vec<ClassMetrics>,
    pub cross_validation: Option<CrossValidationSummary>,
}

impl Serialize for EvaluationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let per_class: BTreeMap<&str, &ClassMetrics> = self
            .matrix
            .labels
            .iter()
            .map(String::as_str)
            .zip(&self.per_class)
            .collect();
        let mut s = serializer.serialize_struct("EvaluationReport", 4)?;
        s.serialize_field("accuracy", &self.accuracy)?;
        s.serialize_field("cross_validation", &self.cross_validation)?;
        s.serialize_field("matrix", &self.matrix)?;
        s.serialize_field("per_class", &per_class)?;
        s.end()
    }
}

impl EvaluationReport {
    pub fn from_matrix(matrix: ConfusionMatrix) -> Self {
        let k = matrix.labels.len();
        let total = matrix.total();
        let accuracy = if total == 0 {
            0.0
        } else {
            matrix.trace() as f64 / total as f64
        };
        let per_class = (0..k)
            .map(|c| {
                let tp = matrix.counts[c][c];
                let predicted: u64 = (0..k).map(|r| matrix.counts[r][c]).sum();
                let actual: u64 = matrix.counts[c].iter().sum();
                let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
                let recall = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                ClassMetrics {
                    precision,
                    recall,
                    f1,
                    support: actual,
                    precision_undefined: predicted == 0,
                    recall_undefined: actual == 0,
                }
            })
            .collect();
        Self {
            matrix,
            accuracy,
            per_class,
            cross_validation: None,
        }
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = &self.matrix.labels;
        let width = labels.iter().map(String::len).max().unwrap_or(0).max(9);
        writeln!(
            f,
            "accuracy {:.3} ({}/{})",
            self.accuracy,
            self.matrix.trace(),
            self.matrix.total()
        )?;
        writeln!(f)?;
        write!(f, "{:<width$}", "true\\pred")?;
        for l in labels {
            write!(f, " {l:>width$}")?;
        }
        writeln!(f)?;
        for (l, row) in labels.iter().zip(&self.matrix.counts) {
            write!(f, "{l:<width$}")?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<width$} {:>9} {:>9} {:>9} {:>9}",
            "class", "precision", "recall", "f1", "support"
        )?;
        for (l, m) in labels.iter().zip(&self.per_class) {
            let flag = if m.precision_undefined || m.recall_undefined { " *" } else { "" };
            writeln!(
                f,
                "{l:<width$} {:>9.4} {:>9.4} {:>9.4} {:>9}{flag}",
                m.precision, m.recall, m.f1, m.support
            )?;
        }
        if self.per_class.iter().any(|m| m.precision_undefined || m.recall_undefined) {
            writeln!(f, "* zero denominator, reported as 0")?;
        }
        if let Some(cv) = &self.cross_validation {
            writeln!(f)?;
            writeln!(f, "{}-fold cross-validation (seed {})", cv.k, cv.seed)?;
            for fold in &cv.folds {
                writeln!(f, "  fold {:>2}: accuracy {:.3} (n={})", fold.fold, fold.accuracy, fold.size)?;
            }
            for s in &cv.skipped {
                writeln!(f, "  fold {:>2}: skipped ({})", s.fold, s.reason)?;
            }
            writeln!(f, "  mean {:.4}  std {:.4}", cv.mean_accuracy, cv.std_accuracy)?;
            if !cv.undersized_classes.is_empty() {
                writeln!(
                    f,
                    "  note: fewer instances than folds for {}",
                    cv.undersized_classes.join(", ")
                )?;
            }
        }
        Ok(())
    }
}

fn confusion_over<'a>(
    model: &NaiveBayesModel,
    instances: impl Iterator<Item = &'a Instance>,
) -> Result<ConfusionMatrix> {
    let schema = model.schema();
    let mut matrix = ConfusionMatrix::new(schema.class_labels().to_vec());
    for instance in instances {
        let label = instance.label().ok_or(Error::Unlabeled)?;
        let truth = schema
            .class_index(label)
            .ok_or_else(|| Error::UnknownClass(label.to_string()))?;
        let prediction = predict(model, &instance.unlabeled())?;
        let guess = schema
            .class_index(&prediction.label)
            .expect("predicted label is declared");
        matrix.record(truth, guess);
    }
    Ok(matrix)
}

/// Score `model` on a labeled dataset; labels are masked before prediction.
pub fn evaluate(model: &NaiveBayesModel, dataset: &Dataset) -> Result<EvaluationReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    model
        .schema()
        .is_compatible_with(dataset.schema())
        .map_err(Error::SchemaMismatch)?;
    let matrix = confusion_over(model, dataset.instances().iter())?;
    Ok(EvaluationReport::from_matrix(matrix))
}

enum FoldOutcome {
    Done(ConfusionMatrix),
    Skipped(String),
}

/// Stratified k-fold cross-validation. A fold whose training split lacks a
/// class, or whose test split is empty, is skipped and reported.
pub fn cross_validate(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    config: TrainConfig,
) -> Result<EvaluationReport> {
    config.validate()?;
    let folds = stratified_folds(dataset, k, seed)?;
    let schema = dataset.schema();

    let outcomes: Vec<Result<FoldOutcome>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let mut trainer = Trainer::new(schema, config)?;
            let mut test = Vec::new();
            for (instance, &f) in dataset.instances().iter().zip(&folds.fold_of) {
                if f == fold {
                    test.push(instance);
                } else {
                    trainer.observe(instance)?;
                }
            }
            if test.is_empty() {
                return Ok(FoldOutcome::Skipped("empty test fold".into()));
            }
            let model = match trainer.finish() {
                Ok(m) => m,
                Err(Error::EmptyClass(c)) => {
                    return Ok(FoldOutcome::Skipped(format!(
                        "training split has no instances of {c:?}"
                    )))
                }
                Err(e) => return Err(e),
            };
            Ok(FoldOutcome::Done(confusion_over(&model, test.into_iter())?))
        })
        .collect();

    let mut pooled = ConfusionMatrix::new(schema.class_labels().to_vec());
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            FoldOutcome::Done(matrix) => {
                results.push(FoldResult {
                    fold,
                    size: matrix.total() as usize,
                    accuracy: matrix.trace() as f64 / matrix.total() as f64,
                });
                pooled.merge(&matrix);
            }
            FoldOutcome::Skipped(reason) => skipped.push(SkippedFold { fold, reason }),
        }
    }
    if results.is_empty() {
        return Err(Error::AllFoldsSkipped);
    }

    let m = results.len() as f64;
    let mean = results.iter().map(|r| r.accuracy).sum::<f64>() / m;
    let std = if results.len() < 2 {
        0.0
    } else {
        (results.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    };

    let mut report = EvaluationReport::from_matrix(pooled);
    report.cross_validation = Some(CrossValidationSummary {
        k,
        seed,
        folds: results,
        skipped,
        mean_accuracy: mean,
        std_accuracy: std,
        undersized_classes: folds.undersized_classes,
    });
    Ok(report)
}
