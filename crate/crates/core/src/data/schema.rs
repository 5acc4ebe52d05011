use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::data::{Instance, Value};
use crate::error::{Error, Result};

pub const DEFAULT_CLASS_LABELS: [&str; 3] = ["good", "average", "poor"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Categorical,
    Numeric,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Categorical => "categorical",
            AttributeKind::Numeric => "numeric",
        }
    }
}

/// One predictor column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(rename = "values", default, skip_serializing_if = "Option::is_none")]
    pub declared_values: Option<Vec<String>>,
}

impl AttributeSpec {
    pub fn categorical(name: impl Into<String>, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Categorical,
            declared_values: Some(values.iter().map(|v| v.to_string()).collect()),
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
            declared_values: None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == AttributeKind::Numeric
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDocument {
    class_attribute: String,
    #[serde(default = "default_class_labels")]
    class_labels: Vec<String>,
    attributes: Vec<AttributeSpec>,
}

fn default_class_labels() -> Vec<String> {
    DEFAULT_CLASS_LABELS.iter().map(|s| s.to_string()).collect()
}

/// Class attribute, ordered class labels and ordered predictor attributes.
///
/// The declared order of `class_labels` doubles as the tie-break order for
/// predictions. Construction validates every invariant, so a value of this
/// type is always well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaDocument")]
pub struct AttributeSchema {
    class_attribute: String,
    class_labels: Vec<String>,
    attributes: Vec<AttributeSpec>,
}

impl TryFrom<SchemaDocument> for AttributeSchema {
    type Error = Error;

    fn try_from(doc: SchemaDocument) -> Result<Self> {
        AttributeSchema::new(doc.class_attribute, doc.class_labels, doc.attributes)
    }
}

impl AttributeSchema {
    pub fn new(
        class_attribute: impl Into<String>,
        class_labels: Vec<String>,
        attributes: Vec<AttributeSpec>,
    ) -> Result<Self> {
        let class_attribute = class_attribute.into();
        if class_attribute.trim().is_empty() {
            return Err(Error::InvalidSchema("class attribute name is empty".into()));
        }
        if class_labels.len() < 2 {
            return Err(Error::TooFewClassLabels);
        }
        let mut seen = HashSet::new();
        for label in &class_labels {
            if label.is_empty() {
                return Err(Error::InvalidSchema("class label is empty".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateClassLabel(label.clone()));
            }
        }

        let mut names = HashSet::new();
        for spec in &attributes {
            if spec.name.trim().is_empty() {
                return Err(Error::InvalidSchema("attribute name is empty".into()));
            }
            if spec.name == class_attribute {
                return Err(Error::ClassAttributeIsPredictor(spec.name.clone()));
            }
            if !names.insert(spec.name.as_str()) {
                return Err(Error::DuplicateAttribute(spec.name.clone()));
            }
            if let Some(values) = &spec.declared_values {
                if spec.is_numeric() {
                    return Err(Error::InvalidSchema(format!(
                        "numeric attribute {:?} cannot declare values",
                        spec.name
                    )));
                }
                if values.is_empty() {
                    return Err(Error::InvalidSchema(format!(
                        "attribute {:?} declares an empty value list",
                        spec.name
                    )));
                }
                let mut distinct = HashSet::new();
                for v in values {
                    if !distinct.insert(v.as_str()) {
                        return Err(Error::InvalidSchema(format!(
                            "attribute {:?} declares value {v:?} twice",
                            spec.name
                        )));
                    }
                }
            }
        }

        Ok(Self {
            class_attribute,
            class_labels,
            attributes,
        })
    }

    pub fn class_attribute(&self) -> &str {
        &self.class_attribute
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == label)
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Predictor names and kinds agree (declared vocabularies may differ).
    pub fn is_compatible_with(&self, other: &AttributeSchema) -> std::result::Result<(), String> {
        if self.class_attribute != other.class_attribute {
            return Err(format!(
                "class attribute {:?} vs {:?}",
                self.class_attribute, other.class_attribute
            ));
        }
        if self.class_labels != other.class_labels {
            return Err(format!(
                "class labels {:?} vs {:?}",
                self.class_labels, other.class_labels
            ));
        }
        let lhs: Vec<_> = self.attributes.iter().map(|a| (&a.name, a.kind)).collect();
        let rhs: Vec<_> = other.attributes.iter().map(|a| (&a.name, a.kind)).collect();
        if lhs != rhs {
            return Err("predictor attributes differ".into());
        }
        Ok(())
    }

    /// Check that an instance only mentions known predictors with values of
    /// the right kind, and that its label (if any) is declared.
    pub fn check_instance(&self, instance: &Instance) -> Result<()> {
        for (name, value) in instance.values() {
            let spec = self
                .attribute(name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
            check_value(spec, value)?;
        }
        if let Some(label) = instance.label() {
            if self.class_index(label).is_none() {
                return Err(Error::UnknownClass(label.to_string()));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_value(spec: &AttributeSpec, value: &Value) -> Result<()> {
    match (spec.kind, value) {
        (_, Value::Missing) => Ok(()),
        (AttributeKind::Categorical, Value::Category(_)) => Ok(()),
        (AttributeKind::Numeric, Value::Number(x)) if x.is_finite() => Ok(()),
        (AttributeKind::Numeric, Value::Number(x)) => Err(Error::InvalidValue {
            attribute: spec.name.clone(),
            message: format!("{x} is not finite"),
        }),
        (kind, _) => Err(Error::KindMismatch {
            attribute: spec.name.clone(),
            expected: kind.as_str(),
        }),
    }
}

/// Parse a UTF-8 JSON schema document.
pub fn parse_schema(text: &str) -> Result<AttributeSchema> {
    let doc: SchemaDocument =
        serde_json::from_str(text).map_err(|e| Error::MalformedSchema(e.to_string()))?;
    AttributeSchema::try_from(doc)
}
