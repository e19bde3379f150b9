use std::fmt;
use std::path::Path;

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed input or rejected parameters.
    Usage(String),
    /// Features or fits that do not exist for the given input.
    Undefined(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Undefined(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Undefined(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<eggsynth::Error> for CliError {
    fn from(e: eggsynth::Error) -> Self {
        match e {
            eggsynth::Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            eggsynth::Error::UndefinedFeatures(_) | eggsynth::Error::DegenerateTest(_) => {
                CliError::Undefined(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
