use std::collections::BTreeMap;
use std::fmt;

/// A single cell value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Category(String),
    Number(f64),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            Value::Category(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Missing => f.write_str("?"),
            Value::Category(s) => f.write_str(s),
            Value::Number(x) => write!(f, "{x}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Category(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Category(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

static MISSING: Value = Value::Missing;

/// One personnel record: predictor values plus an optional class label.
///
/// Missing values are not stored; an absent key and an explicit
/// [`Value::Missing`] are the same thing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instance {
    values: BTreeMap<String, Value>,
    label: Option<String>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<Value>) -> Self {
        self.set(name, value);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<Value>) {
        let name = name.into();
        match value.into() {
            Value::Missing => {
                self.values.remove(&name);
            }
            v => {
                self.values.insert(name, v);
            }
        }
    }

    pub fn get(&self, name: &str) -> &Value {
        self.values.get(name).unwrap_or(&MISSING)
    }

    /// Present (non-missing) values in name order.
    pub fn values(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: Option<String>) {
        self.label = label;
    }

    /// The same evidence with the label masked.
    pub fn unlabeled(&self) -> Instance {
        Instance {
            values: self.values.clone(),
            label: None,
        }
    }
}
