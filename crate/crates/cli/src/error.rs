use thiserror::Error;

/// Exit codes: 0 success, 1 configuration or I/O, 2 numerical, 3 oracle breach.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fbs_core::Error),
    #[error("oracle tolerance breached: {0}")]
    Breach(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) if e.is_config() || matches!(e, fbs_core::Error::Io { .. }) => 1,
            CliError::Core(_) => 2,
            CliError::Breach(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_per_class() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(fbs_core::Error::Config("x".into())).exit_code(), 1);
        let numeric = fbs_core::Error::Instability { step: 1, detail: "x".into() };
        assert_eq!(CliError::Core(numeric).exit_code(), 2);
        assert_eq!(CliError::Breach("x".into()).exit_code(), 3);
    }
}
