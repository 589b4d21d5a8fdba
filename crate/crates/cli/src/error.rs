use ndsym_core::characteristics::CharError;
use ndsym_core::isovector::EngineError;
use ndsym_core::kernel::KernelError;
use ndsym_numerics::NumError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// Invalid flags, configuration, expressions or I/O.
    pub const USAGE: u8 = 1;
    /// Derivation failed, a back-substitution failed or a residual exceeded its tolerance.
    pub const FAILED: u8 = 2;
    /// `--strict-reference`: a reference equation is not derivable or discrepant.
    pub const STRICT_AUDIT: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("invalid expression '{text}': {source}")]
    Expression { text: String, source: KernelError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Characteristics(#[from] CharError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Numerics(#[from] NumError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Expression { .. } | CliError::Io(_) | CliError::Json(_) => exit::USAGE,
            CliError::Numerics(
                NumError::InvalidGrid(_) | NumError::InvalidTransform(_) | NumError::Unbound(_) | NumError::Io(_),
            ) => exit::USAGE,
            _ => exit::FAILED,
        }
    }
}
