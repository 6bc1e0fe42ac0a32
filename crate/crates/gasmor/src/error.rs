use std::fmt;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum RunError {
    /// Bad arguments, unreadable or malformed input files (exit code 2).
    Usage(anyhow::Error),
    /// Steady-state, integration or reduction failure (exit code 3).
    Numerical(anyhow::Error),
}

impl RunError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        RunError::Usage(anyhow::anyhow!("{msg}"))
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        RunError::Numerical(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(e) | RunError::Numerical(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for RunError {}
