use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget { what: String, needed: u64, limit: u64 },

    #[error("graph is disconnected: vertices {0} and {1} lie in different components")]
    Disconnected(usize, usize),

    #[error("vector width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: u32, actual: u32 },

    #[error("span is not totally singular")]
    NotTotallySingular,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("maximal clique limit of {0} exceeded")]
    CliqueLimit(usize),

    /// A structural statement that must hold on the model failed.
    #[error("contradiction: {0}")]
    Contradiction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_contradiction(&self) -> bool {
        matches!(self, Error::Contradiction(_))
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
