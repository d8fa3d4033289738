use thiserror::Error;

/// Everything that can go wrong in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("empty region")]
    EmptyRegion,

    #[error("outside domain: {0}")]
    OutsideDomain(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("zero-section collision between cells {left} and {right}")]
    ZeroSectionCollision { left: usize, right: usize },

    #[error("conormal collision at cell {cell}")]
    ConormalCollision { cell: usize },

    #[error("symbol is not positively homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("tube boundary leaves the timelike regime at s = {s}, t = {t}")]
    TubeNotTimelike { s: f64, t: f64 },

    #[error("vanishing gradient at {0:?}")]
    VanishingGradient(Vec<f64>),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
