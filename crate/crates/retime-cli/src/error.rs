//! Exit-code discipline: 0 success, 1 runtime failure, 2 usage error.

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Runtime(String),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        AppError::Runtime(msg.into())
    }

    pub fn usage_from(err: retime::Error) -> Self {
        AppError::Usage(err.to_string())
    }

    #[cfg(test)]
    pub fn is_usage(&self) -> bool {
        matches!(self, AppError::Usage(_))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<retime::Error> for AppError {
    fn from(err: retime::Error) -> Self {
        match &err {
            retime::Error::InvalidConfig(_) | retime::Error::UnknownSystem(_) => {
                AppError::Usage(err.to_string())
            }
            _ => AppError::Runtime(err.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(err: std::io::Error) -> Self {
        AppError::Runtime(err.to_string())
    }
}

/// Attach (system, mu) context to a failure.
pub fn with_case_context<T>(
    result: Result<T, impl fmt::Display>,
    system: &str,
    exponent: f64,
) -> AppResult<T> {
    result.map_err(|e| {
        AppError::runtime(format!(
            "{system} mu=10^{}: {e}",
            crate::config::exponent_dir_name(exponent)
        ))
    })
}
