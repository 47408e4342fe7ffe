use su11::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] su11::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    /// Process exit code: 1 config, 2 numeric, 3 fit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Output { .. } => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => 1,
                ErrorClass::Numeric => 2,
                ErrorClass::Fit => 3,
            },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(su11::Error::Json(e))
    }
}
