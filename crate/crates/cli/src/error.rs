use mcqr::McqrError;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(McqrError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(err: &McqrError) -> i32 {
    match err {
        McqrError::Config { .. } => EXIT_USAGE,
        McqrError::Chain { .. } | McqrError::Decomposition { .. } | McqrError::Domain(_) => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<McqrError> for CliError {
    fn from(e: McqrError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(McqrError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(McqrError::Json(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attach the offending path to an I/O failure.
pub fn io_at(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Core(McqrError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
