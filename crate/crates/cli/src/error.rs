use std::fmt;
use std::process::ExitCode;

/// Failure classes the command line distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or missing input, configuration or model: exit 2.
    Input,
    /// Inputs are well formed but cannot support the request: exit 3.
    Data,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Data => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a path or step to an underlying error as an input error.
pub trait InputContext<T> {
    fn input_ctx(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: fmt::Display> InputContext<T> for Result<T, E> {
    fn input_ctx(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::input(format!("{what}: {e}")))
    }
}
