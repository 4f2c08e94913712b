use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("XML parse error at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error("duplicate case id `{0}`")]
    DuplicateCase(String),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("list parse error at offset {offset}: {message}")]
    ListParse { offset: usize, message: String },

    #[error("result attribute `{attr}` missing from cases: {}", case_ids.join(", "))]
    MissingResult { attr: String, case_ids: Vec<String> },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("latent feature generation: {0}")]
    Latent(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("condition parse error: {0}")]
    ConditionParse(String),

    #[error("class mismatch: rules target `{rules}`, ground truth targets `{truth}`")]
    ClassMismatch { rules: String, truth: String },

    #[error("unsupported document version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input or configuration rather than by the data being mined.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Io(_) | Error::Version { .. }
        )
    }
}
