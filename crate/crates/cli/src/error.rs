//! Error-to-exit-code policy: 1 for usage mistakes, 2 for data and
//! validation problems, 3 for runtime/training failures.

use std::fmt;

use biaslab_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong (missing flag, conflicting flags).
    Usage(String),
    /// A pipeline stage failed.
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(CoreError::from(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                CoreError::NonFiniteGradient { .. }
                | CoreError::FoldTrainer { .. }
                | CoreError::EmptySplit(_) => 3,
                _ => 2,
            },
        }
    }

    /// The `caused by` chain under the headline message.
    pub fn sources(&self) -> Vec<String> {
        let mut chain = Vec::new();
        if let CliError::Core(e) = self {
            let mut source = std::error::Error::source(e);
            while let Some(cause) = source {
                chain.push(cause.to_string());
                source = cause.source();
            }
        }
        chain
    }
}
