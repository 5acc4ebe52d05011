//! Schema definition, CSV ingestion and cleaning, and stratified folds.

mod folds;
mod input;
mod instance;
mod load;
mod schema;

pub use folds::{stratified_folds, FoldAssignment};
pub use input::{
    instance_from_json, instance_to_json, parse_assignment, parse_instance_text, value_from_json,
    value_to_json,
};
pub use instance::{Instance, Value};
pub use load::{load_dataset, load_pool_rows, write_csv, CleaningReport, DroppedRow, NearDuplicate};
pub(crate) use schema::check_value as schema_check_value;
pub use schema::{parse_schema, AttributeKind, AttributeSchema, AttributeSpec, DEFAULT_CLASS_LABELS};

use crate::error::{Error, Result};

/// A schema plus conforming instances and the report from cleaning them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: AttributeSchema,
    instances: Vec<Instance>,
    report: CleaningReport,
}

impl Dataset {
    /// Build a dataset from already-typed instances, validating each one.
    pub fn new(schema: AttributeSchema, instances: Vec<Instance>) -> Result<Self> {
        for instance in &instances {
            schema.check_instance(instance)?;
        }
        let report = CleaningReport {
            rows_read: instances.len(),
            ..CleaningReport::default()
        };
        Ok(Self {
            schema,
            instances,
            report,
        })
    }

    pub(crate) fn from_parts(
        schema: AttributeSchema,
        instances: Vec<Instance>,
        report: CleaningReport,
    ) -> Self {
        Self {
            schema,
            instances,
            report,
        }
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn cleaning_report(&self) -> &CleaningReport {
        &self.report
    }

    /// Non-empty and every instance carries a label.
    pub fn is_labeled(&self) -> bool {
        !self.instances.is_empty() && self.instances.iter().all(|i| i.label().is_some())
    }

    /// Class index of every instance; fails on unlabeled data.
    pub fn class_indices(&self) -> Result<Vec<usize>> {
        self.instances
            .iter()
            .map(|i| {
                let label = i.label().ok_or(Error::Unlabeled)?;
                self.schema
                    .class_index(label)
                    .ok_or_else(|| Error::UnknownClass(label.to_string()))
            })
            .collect()
    }

    /// Number of instances per class, in declared class order.
    pub fn class_counts(&self) -> Result<Vec<usize>> {
        let mut counts = vec![0; self.schema.n_classes()];
        for c in self.class_indices()? {
            counts[c] += 1;
        }
        Ok(counts)
    }

    /// A new dataset with the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            report: CleaningReport {
                rows_read: indices.len(),
                ..CleaningReport::default()
            },
        }
    }
}
