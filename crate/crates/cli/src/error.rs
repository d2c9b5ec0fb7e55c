use std::fmt;
use std::process::ExitCode;

use invariance_cert::CertError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable input; exit code 2.
    Input(String),
    /// A statistic went NaN; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

/// Attach the offending flag to a library error.
pub fn at(flag: &str) -> impl Fn(CertError) -> CliError + '_ {
    move |e| match e {
        CertError::Numerical(m) => CliError::Numerical(m),
        other => CliError::Input(format!("{flag}: {other}")),
    }
}

pub type CliResult<T> = Result<T, CliError>;
