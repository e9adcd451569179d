use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    UnknownCommand,
    Numerical,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Config => "invalid-config",
            Self::UnknownCommand => "unknown-command",
            Self::Numerical => "numerical-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub reason: String,
}

impl CliError {
    pub fn config(reason: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            reason: reason.into(),
        }
    }

    pub fn unknown_command(name: &str) -> Self {
        Self {
            kind: ErrorKind::UnknownCommand,
            reason: format!("unknown command \"{name}\""),
        }
    }

    pub fn numerical(reason: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::UnknownCommand => 4,
        }
    }
}

impl fmt::Display for CliError {
    /// Single line: `<kind>: <reason>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason = self.reason.replace(['\n', '\r'], " ");
        write!(f, "{}: {}", self.kind.as_str(), reason)
    }
}

impl std::error::Error for CliError {}

impl From<qle_core::Error> for CliError {
    fn from(e: qle_core::Error) -> Self {
        use qle_core::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::GridNotIncreasing
            | E::AcausalCutoff { .. }
            | E::NonRationalKernel(_)
            | E::NonIntegrableKernel { .. } => Self::config(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}
