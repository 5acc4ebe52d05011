//! Instance encodings used at the edges: the `name=value,...` command-line
//! micro-grammar and JSON instance documents.
//!
//! Micro-grammar:
//!
//! ```text
//! input      := [assignment (',' assignment)*]
//! assignment := name '=' value
//! ```
//!
//! `\,` `\=` and `\\` escape a literal comma, equals sign and backslash; any
//! other backslash sequence is an error. Names and values are trimmed. A value
//! of `?` or the empty string is missing. Empty assignments (for example a
//! trailing comma) are ignored. Naming the class attribute sets the label.

use serde_json::{Map, Number, Value as Json};

use super::schema::check_value;
use super::{AttributeKind, AttributeSchema, AttributeSpec, Instance, Value};
use crate::error::{Error, Result};

fn split_unescaped(text: &str, sep: char, limit: usize) -> Result<Vec<String>> {
    let mut parts = vec![String::new()];
    let mut chars = text.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => match chars.next() {
                Some(esc @ (',' | '=' | '\\')) => {
                    let last = parts.last_mut().expect("never empty");
                    last.push('\\');
                    last.push(esc);
                }
                Some(other) => {
                    return Err(Error::MalformedInput(format!("unknown escape \\{other}")))
                }
                None => return Err(Error::MalformedInput("dangling backslash".into())),
            },
            c if c == sep && parts.len() < limit => parts.push(String::new()),
            c => parts.last_mut().expect("never empty").push(c),
        }
    }
    Ok(parts)
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(ch) = chars.next() {
        if ch == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(ch);
        }
    }
    out
}

fn typed_value(spec: &AttributeSpec, raw: &str) -> Result<Value> {
    if raw.is_empty() || raw == "?" {
        return Ok(Value::Missing);
    }
    match spec.kind {
        AttributeKind::Categorical => Ok(Value::Category(raw.to_string())),
        AttributeKind::Numeric => match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Number(x)),
            _ => Err(Error::InvalidValue {
                attribute: spec.name.clone(),
                message: format!("{raw:?} is not a finite number"),
            }),
        },
    }
}

enum Target<'a> {
    Attribute(&'a AttributeSpec),
    Label,
}

fn split_assignment<'s>(piece: &str, schema: &'s AttributeSchema) -> Result<(Target<'s>, String)> {
    let halves = split_unescaped(piece, '=', 2)?;
    if halves.len() != 2 {
        return Err(Error::MalformedInput(format!(
            "expected name=value, got {:?}",
            piece.trim()
        )));
    }
    let name = unescape(halves[0].trim());
    let value = unescape(halves[1].trim());
    if name == schema.class_attribute() {
        return Ok((Target::Label, value));
    }
    let spec = schema
        .attribute(&name)
        .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
    Ok((Target::Attribute(spec), value))
}

/// Parse `name=value,...` into an instance of `schema`.
pub fn parse_instance_text(text: &str, schema: &AttributeSchema) -> Result<Instance> {
    let mut instance = Instance::new();
    let mut seen = std::collections::HashSet::new();
    for piece in split_unescaped(text, ',', usize::MAX)? {
        if piece.trim().is_empty() {
            continue;
        }
        let (target, raw) = split_assignment(&piece, schema)?;
        match target {
            Target::Attribute(spec) => {
                if !seen.insert(spec.name.clone()) {
                    return Err(Error::MalformedInput(format!(
                        "attribute {:?} given twice",
                        spec.name
                    )));
                }
                instance.set(spec.name.clone(), typed_value(spec, &raw)?);
            }
            Target::Label => {
                if !(raw.is_empty() || raw == "?") {
                    if schema.class_index(&raw).is_none() {
                        return Err(Error::UnknownClass(raw));
                    }
                    instance.set_label(Some(raw));
                }
            }
        }
    }
    Ok(instance)
}

/// Parse a single `name=value` assignment to a predictor.
pub fn parse_assignment(text: &str, schema: &AttributeSchema) -> Result<(String, Value)> {
    match split_assignment(text, schema)? {
        (Target::Attribute(spec), raw) => Ok((spec.name.clone(), typed_value(spec, &raw)?)),
        (Target::Label, _) => Err(Error::UnknownAttribute(schema.class_attribute().to_string())),
    }
}

/// Decode one JSON cell for attribute `spec`: `null`, `"?"` or `""` are
/// missing; categorical values are strings and numeric values are numbers.
pub fn value_from_json(spec: &AttributeSpec, json: &Json) -> Result<Value> {
    let value = match json {
        Json::Null => Value::Missing,
        Json::String(s) if s.is_empty() || s == "?" => Value::Missing,
        Json::String(s) if spec.kind == AttributeKind::Categorical => Value::Category(s.clone()),
        Json::Number(n) if spec.kind == AttributeKind::Numeric => {
            Value::Number(n.as_f64().ok_or_else(|| Error::InvalidValue {
                attribute: spec.name.clone(),
                message: "number out of range".into(),
            })?)
        }
        _ => {
            return Err(Error::KindMismatch {
                attribute: spec.name.clone(),
                expected: spec.kind.as_str(),
            })
        }
    };
    check_value(spec, &value)?;
    Ok(value)
}

pub fn value_to_json(value: &Value) -> Json {
    match value {
        Value::Missing => Json::Null,
        Value::Category(s) => Json::String(s.clone()),
        Value::Number(x) => Number::from_f64(*x).map(Json::Number).unwrap_or(Json::Null),
    }
}

/// Decode a JSON object `{attribute: value, ...}`. The class attribute, when
/// present, sets the label.
pub fn instance_from_json(schema: &AttributeSchema, json: &Json) -> Result<Instance> {
    let object = json
        .as_object()
        .ok_or_else(|| Error::MalformedInput("instance must be a JSON object".into()))?;
    let mut instance = Instance::new();
    for (name, cell) in object {
        if name == schema.class_attribute() {
            match cell {
                Json::Null => {}
                Json::String(label) => {
                    if schema.class_index(label).is_none() {
                        return Err(Error::UnknownClass(label.clone()));
                    }
                    instance.set_label(Some(label.clone()));
                }
                _ => return Err(Error::MalformedInput("class label must be a string".into())),
            }
            continue;
        }
        let spec = schema
            .attribute(name)
            .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
        instance.set(name.clone(), value_from_json(spec, cell)?);
    }
    Ok(instance)
}

/// Encode an instance as a JSON object; missing predictors become `null`.
pub fn instance_to_json(schema: &AttributeSchema, instance: &Instance) -> Json {
    let mut object = Map::new();
    for spec in schema.attributes() {
        object.insert(spec.name.clone(), value_to_json(instance.get(&spec.name)));
    }
    if let Some(label) = instance.label() {
        object.insert(schema.class_attribute().to_string(), Json::String(label.into()));
    }
    Json::Object(object)
}
