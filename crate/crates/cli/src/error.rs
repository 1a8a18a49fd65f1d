use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// A file that failed to parse. Format errors print as `file:line:offset`.
    #[error("{}", located(path, source))]
    Input {
        path: PathBuf,
        source: pardiff_core::Error,
    },

    /// A command-line expression that failed to parse.
    #[error("{flag}: {source}")]
    Expr {
        flag: &'static str,
        source: pardiff_core::Error,
    },

    #[error(transparent)]
    Core(#[from] pardiff_core::Error),
}

fn located(path: &std::path::Path, err: &pardiff_core::Error) -> String {
    match err {
        pardiff_core::Error::Format {
            line,
            offset,
            message,
        } if *line > 0 => format!("{}:{line}:{offset}: {message}", path.display()),
        pardiff_core::Error::Format { message, .. } => format!("{}: {message}", path.display()),
        other => format!("{}: {other}", path.display()),
    }
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
