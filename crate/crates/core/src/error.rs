use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports.
///
/// [`Error::code`] gives a stable machine-readable identifier that the CLI and
/// the HTTP service echo back to callers.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("malformed schema document: {0}")]
    MalformedSchema(String),
    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),
    #[error("schema must declare at least two class labels")]
    TooFewClassLabels,
    #[error("duplicate class label {0:?}")]
    DuplicateClassLabel(String),
    #[error("class attribute {0:?} is also listed as a predictor")]
    ClassAttributeIsPredictor(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("CSV has no header row")]
    MissingHeader,
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("class column {0:?} is absent")]
    MissingClassColumn(String),
    #[error("pool CSV must start with an `id` column")]
    MissingIdColumn,
    #[error("no rows survived cleaning")]
    NoRows,

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("attribute {attribute:?} is {expected}, got a value of another kind")]
    KindMismatch {
        attribute: String,
        expected: &'static str,
    },
    #[error("invalid value for {attribute:?}: {message}")]
    InvalidValue { attribute: String, message: String },
    #[error("unknown class label {0:?}")]
    UnknownClass(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset is unlabeled")]
    Unlabeled,
    #[error("class {0:?} has no training instances")]
    EmptyClass(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid fold count {0}: need at least 2")]
    InvalidFolds(usize),
    #[error("every cross-validation fold was skipped")]
    AllFoldsSkipped,
    #[error("dataset schema does not match model schema: {0}")]
    SchemaMismatch(String),

    #[error("unsupported model version {0}")]
    UnsupportedModelVersion(u64),
    #[error("malformed model document: {0}")]
    MalformedModel(String),
    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("duplicate candidate id {0:?}")]
    DuplicateId(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("team size must be at least 1")]
    InvalidTeamSize,
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),

    #[error("invalid generative spec: {0}")]
    InvalidSpec(String),
    #[error("no class has a finite score for this instance")]
    DegenerateEvidence,
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedSchema(_) => "malformed_schema",
            Error::DuplicateAttribute(_) => "duplicate_attribute",
            Error::TooFewClassLabels => "too_few_class_labels",
            Error::DuplicateClassLabel(_) => "duplicate_class_label",
            Error::ClassAttributeIsPredictor(_) => "class_attribute_is_predictor",
            Error::InvalidSchema(_) => "invalid_schema",
            Error::MalformedCsv(_) => "malformed_csv",
            Error::MissingHeader => "missing_header",
            Error::UnknownColumn(_) => "unknown_column",
            Error::DuplicateColumn(_) => "duplicate_column",
            Error::MissingClassColumn(_) => "missing_class_column",
            Error::MissingIdColumn => "missing_id_column",
            Error::NoRows => "no_rows",
            Error::UnknownAttribute(_) => "unknown_attribute",
            Error::KindMismatch { .. } => "kind_mismatch",
            Error::InvalidValue { .. } => "invalid_value",
            Error::UnknownClass(_) => "unknown_class",
            Error::MalformedInput(_) => "malformed_input",
            Error::EmptyDataset => "empty_dataset",
            Error::Unlabeled => "unlabeled_dataset",
            Error::EmptyClass(_) => "empty_class",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidFolds(_) => "invalid_folds",
            Error::AllFoldsSkipped => "all_folds_skipped",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::UnsupportedModelVersion(_) => "unsupported_model_version",
            Error::MalformedModel(_) => "malformed_model",
            Error::ModelInvariant(_) => "model_invariant",
            Error::DuplicateId(_) => "duplicate_id",
            Error::EmptyPool => "empty_pool",
            Error::InvalidTeamSize => "invalid_team_size",
            Error::InvalidThreshold(_) => "invalid_threshold",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::DegenerateEvidence => "degenerate_evidence",
        }
    }

    /// True for failures that indicate a broken internal invariant rather
    /// than bad user input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::DegenerateEvidence)
    }
}
