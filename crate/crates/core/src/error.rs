use thiserror::Error;

pub type Result<T> = std::result::Result<T, McqrError>;

#[derive(Debug, Error)]
pub enum McqrError {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix expected to be symmetric positive definite could not be factorised.
    #[error("{what}: matrix is not positive definite: {matrix:?}")]
    Decomposition { what: String, matrix: Vec<Vec<f64>> },

    #[error("ingestion error at row {row}: {msg}")]
    Ingestion { row: usize, msg: String },

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("chain {chain} failed at iteration {iteration}: {source}")]
    Chain {
        chain: usize,
        iteration: usize,
        #[source]
        source: Box<McqrError>,
    },

    #[error("diagnostics: {0}")]
    Diagnostics(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl McqrError {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        McqrError::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn ingestion(row: usize, msg: impl Into<String>) -> Self {
        McqrError::Ingestion {
            row,
            msg: msg.into(),
        }
    }

    /// True for failures caused by the numerical state of a chain rather than its inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            McqrError::Decomposition { .. } => true,
            McqrError::Chain { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
