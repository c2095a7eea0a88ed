use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed model, scene, or run configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A skeleton with zero-length bones or non-finite coordinates.
    #[error("degenerate skeleton: {0}")]
    DegenerateSkeleton(String),
    /// Inputs outside an operation's domain (zero hand span, collinear palm, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A file failed schema or consistency validation.
    #[error("validation error: {0}")]
    Validation(String),
    /// Synthetic trajectory generation could not produce a usable grasp script.
    #[error("generation error: {0}")]
    Generation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::DegenerateSkeleton(_) => "degenerate_skeleton",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::Validation(_) => "validation",
            Error::Generation(_) => "generation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
