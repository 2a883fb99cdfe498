use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("polygon is not strictly convex at vertex {index}")]
    NotConvex { index: usize },

    #[error("origin is not an interior point of the polygon")]
    OriginNotInterior,

    #[error("domain violates B(0,4) ⊂ Ω ⊂ B(0,2^M): {0}")]
    Containment(String),

    #[error("boundary graph over [-1,1] is not strictly below the origin")]
    GraphNotBelow,

    #[error("below resolution floor: {0}")]
    Resolution(String),

    #[error("budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("no admissible position left for interval {index}")]
    NoGap { index: usize },

    #[error("exact arithmetic overflow: {0}")]
    Overflow(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical audit failed: {0}")]
    Audit(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Failures a caller should treat as a numerical audit rather than bad input.
    pub fn is_audit(&self) -> bool {
        matches!(self, Error::Audit(_) | Error::Resolution(_) | Error::Overflow(_))
    }
}
