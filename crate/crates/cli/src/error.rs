use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Accuracy(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Accuracy(_) => 3,
            _ => 1,
        }
    }
}

impl From<rtri::Error> for CliError {
    fn from(e: rtri::Error) -> Self {
        match e {
            rtri::Error::Accuracy(_) => CliError::Accuracy(e.to_string()),
            rtri::Error::SingularMatrix(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
