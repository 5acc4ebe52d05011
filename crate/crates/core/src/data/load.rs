use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{AttributeKind, AttributeSchema, Dataset, Instance};
use crate::error::{Error, Result};

/// What cleaning did to the raw rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CleaningReport {
    /// Data rows in the input, header excluded.
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub missing_cells: usize,
    /// Cells whose text changed when surrounding whitespace was trimmed.
    pub values_coerced: usize,
    pub dropped: Vec<DroppedRow>,
    /// Categorical values not in the attribute's declared list.
    pub out_of_vocabulary: BTreeMap<String, BTreeSet<String>>,
    /// Values of one attribute that differ only by letter case.
    pub near_duplicates: Vec<NearDuplicate>,
}

impl CleaningReport {
    pub fn rows_kept(&self) -> usize {
        self.rows_read - self.rows_dropped
    }

    /// Human-readable notes, one per line-worthy event.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for row in &self.dropped {
            notes.push(format!("dropped line {}: {}", row.line, row.reason));
        }
        for (attr, values) in &self.out_of_vocabulary {
            let list: Vec<_> = values.iter().map(String::as_str).collect();
            notes.push(format!(
                "attribute {attr:?}: undeclared values accepted: {}",
                list.join(", ")
            ));
        }
        for nd in &self.near_duplicates {
            notes.push(format!(
                "attribute {:?}: values differ only by case: {}",
                nd.attribute,
                nd.values.join(", ")
            ));
        }
        notes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedRow {
    /// 1-based line in the source text.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearDuplicate {
    pub attribute: String,
    pub values: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Labeled,
    Unlabeled,
    Pool,
}

enum Column {
    Attribute(usize),
    Class,
    Id,
}

struct Table {
    rows: Vec<(Option<String>, Instance)>,
    report: CleaningReport,
}

fn is_missing_token(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

fn parse_table(csv_text: &str, schema: &AttributeSchema, mode: Mode) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::None)
        .from_reader(csv_text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::MalformedCsv(e.to_string())),
        None => return Err(Error::MissingHeader),
    };
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::MissingHeader);
    }

    let mut columns = Vec::with_capacity(header.len());
    let mut seen = HashSet::new();
    for (pos, raw) in header.iter().enumerate() {
        let name = raw.trim();
        if !seen.insert(name.to_string()) {
            return Err(Error::DuplicateColumn(name.to_string()));
        }
        let column = if mode == Mode::Pool && pos == 0 {
            if name != "id" {
                return Err(Error::MissingIdColumn);
            }
            Column::Id
        } else if let Some(i) = schema.attribute_index(name) {
            Column::Attribute(i)
        } else if name == schema.class_attribute() {
            Column::Class
        } else {
            return Err(Error::UnknownColumn(name.to_string()));
        };
        columns.push(column);
    }
    if mode == Mode::Pool && columns.is_empty() {
        return Err(Error::MissingIdColumn);
    }
    if mode == Mode::Labeled && !columns.iter().any(|c| matches!(c, Column::Class)) {
        return Err(Error::MissingClassColumn(schema.class_attribute().to_string()));
    }

    let mut report = CleaningReport::default();
    let mut rows = Vec::new();
    let mut observed: Vec<BTreeSet<String>> = vec![BTreeSet::new(); schema.attributes().len()];

    for record in records {
        let record = record.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        report.rows_read += 1;

        let mut instance = Instance::new();
        let mut id = None;
        let mut drop_reason = None;
        let mut missing = 0;
        let mut coerced = 0;
        let mut categories = Vec::new();

        for (column, raw) in columns.iter().zip(record.iter()) {
            let cell = raw.trim();
            if cell.len() != raw.len() {
                coerced += 1;
            }
            match *column {
                Column::Id => {
                    if cell.is_empty() {
                        drop_reason.get_or_insert_with(|| "empty candidate id".to_string());
                    }
                    id = Some(cell.to_string());
                }
                Column::Class => {
                    if mode != Mode::Labeled {
                        continue;
                    }
                    if is_missing_token(cell) {
                        drop_reason.get_or_insert_with(|| "missing class label".to_string());
                    } else if schema.class_index(cell).is_none() {
                        drop_reason
                            .get_or_insert_with(|| format!("unknown class label {cell:?}"));
                    } else {
                        instance.set_label(Some(cell.to_string()));
                    }
                }
                Column::Attribute(i) => {
                    let spec = &schema.attributes()[i];
                    if is_missing_token(cell) {
                        missing += 1;
                        continue;
                    }
                    match spec.kind {
                        AttributeKind::Numeric => match cell.parse::<f64>() {
                            Ok(x) if x.is_finite() => instance.set(spec.name.clone(), x),
                            _ => {
                                drop_reason.get_or_insert_with(|| {
                                    format!("unparsable numeric value {cell:?} for {:?}", spec.name)
                                });
                            }
                        },
                        AttributeKind::Categorical => {
                            categories.push(i);
                            instance.set(spec.name.clone(), cell);
                        }
                    }
                }
            }
        }

        if let Some(reason) = drop_reason {
            report.rows_dropped += 1;
            report.dropped.push(DroppedRow { line, reason });
            continue;
        }
        report.missing_cells += missing;
        report.values_coerced += coerced;
        for i in categories {
            let spec = &schema.attributes()[i];
            let value = instance.get(&spec.name).as_category().expect("set above");
            if let Some(declared) = &spec.declared_values {
                if !declared.iter().any(|d| d == value) {
                    report
                        .out_of_vocabulary
                        .entry(spec.name.clone())
                        .or_default()
                        .insert(value.to_string());
                }
            }
            observed[i].insert(value.to_string());
        }
        rows.push((id, instance));
    }

    for (i, values) in observed.iter().enumerate() {
        let mut by_folded: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for v in values {
            by_folded.entry(v.to_lowercase()).or_default().push(v.clone());
        }
        for group in by_folded.into_values().filter(|g| g.len() > 1) {
            report.near_duplicates.push(NearDuplicate {
                attribute: schema.attributes()[i].name.clone(),
                values: group,
            });
        }
    }

    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(Table { rows, report })
}

/// Parse and clean a CSV document against `schema`.
///
/// Cells are trimmed; empty cells and `?` become missing. A row with an
/// unparsable numeric cell is dropped and reported, as is a labeled row whose
/// class is missing or undeclared. Surviving rows keep their input order.
/// When `labeled` is false a class column, if present, is ignored.
pub fn load_dataset(csv_text: &str, schema: &AttributeSchema, labeled: bool) -> Result<Dataset> {
    let mode = if labeled { Mode::Labeled } else { Mode::Unlabeled };
    let table = parse_table(csv_text, schema, mode)?;
    let instances = table.rows.into_iter().map(|(_, i)| i).collect();
    Ok(Dataset::from_parts(schema.clone(), instances, table.report))
}

/// Parse a candidate pool: a leading `id` column followed by predictors.
pub fn load_pool_rows(
    csv_text: &str,
    schema: &AttributeSchema,
) -> Result<(Vec<(String, Instance)>, CleaningReport)> {
    let table = parse_table(csv_text, schema, Mode::Pool)?;
    let rows = table
        .rows
        .into_iter()
        .map(|(id, i)| (id.expect("pool rows always carry an id"), i))
        .collect();
    Ok((rows, table.report))
}

/// Render a dataset as CSV: predictors in schema order, then the class
/// column when the dataset is labeled. Missing cells are written as `?`.
pub fn write_csv(dataset: &Dataset) -> String {
    let schema = dataset.schema();
    let labeled = dataset.is_labeled();
    let mut writer = csv::Writer::from_writer(Vec::new());

    let mut header: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    if labeled {
        header.push(schema.class_attribute());
    }
    writer.write_record(&header).expect("in-memory write");

    let mut row = Vec::with_capacity(header.len());
    for instance in dataset.instances() {
        row.clear();
        for spec in schema.attributes() {
            row.push(instance.get(&spec.name).to_string());
        }
        if labeled {
            row.push(instance.label().unwrap_or("?").to_string());
        }
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 is UTF-8")
}
