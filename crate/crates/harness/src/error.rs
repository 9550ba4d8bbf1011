use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("case {case}: {source}")]
    Case {
        case: String,
        #[source]
        source: fourier_penalty::Error,
    },
    #[error(transparent)]
    Core(#[from] fourier_penalty::Error),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("invalid study input: {0}")]
    Study(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
