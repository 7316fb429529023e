use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(Vec<String>),
    Io(String),
    Compute(critprobe_core::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Compute(e) => e.category(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Compute(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => write!(f, "{m}"),
            CliError::Validation(errs) => write!(f, "{}", errs.join("; ")),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl From<critprobe_core::Error> for CliError {
    fn from(e: critprobe_core::Error) -> Self {
        CliError::Compute(e)
    }
}
