use std::fmt;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unknown command or flag.
    Usage(String),
    /// A flag or config value outside its allowed range.
    BadValue(String),
    /// The computation itself failed.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::BadValue(_) => 65,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::BadValue(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<tanglelab_core::Error> for CliError {
    fn from(e: tanglelab_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}
