use thiserror::Error;

/// Every failure mode of the library. [`Error::code`] gives the stable
/// machine-readable name used by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Gram matrix is not symmetric at ({row}, {col})")]
    NonSymmetric { row: usize, col: usize },
    #[error("lattice is degenerate (determinant 0)")]
    Degenerate,
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("lattice is odd; an even lattice is required")]
    OddLattice,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group is not 2-elementary (invariant factors {factors})")]
    NotTwoElementary { factors: String },
    #[error("group of order {order} exceeds the search limit {limit}")]
    GroupTooLarge { order: String, limit: u64 },
    #[error("subgroup is not isotropic: {0}")]
    NotIsotropic(String),
    #[error("glue vector is not in the dual lattice: {0}")]
    NotFiniteIndex(String),
    #[error("basis vectors are linearly dependent")]
    DependentVectors,
    #[error("expected signature ({expected_plus}, 2), got ({t_plus}, {t_minus})")]
    WrongSignature {
        expected_plus: usize,
        t_plus: usize,
        t_minus: usize,
    },
    #[error("rank {0} outside the supported range 2..=22")]
    RankOutOfRange(usize),
    #[error("discriminant must be positive, got {0}")]
    NonPositiveD(String),
    #[error("discriminant {0} is not congruent to 0 or 2 mod 6")]
    InvalidDiscriminant(String),
    #[error("lattice is not positive definite")]
    NotPositiveDefinite,
    #[error("lattice cannot be scaled by 1/2: offending entry ({row}, {col})")]
    NotHalfScalable { row: usize, col: usize },
    #[error("rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("unknown lattice name `{0}`")]
    UnknownName(String),
    #[error("bad parameter for `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid finite quadratic form: {0}")]
    InvalidForm(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::NonSymmetric { .. } => "NonSymmetric",
            Error::Degenerate => "Degenerate",
            Error::ZeroScale => "ZeroScale",
            Error::OddLattice => "OddLattice",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotTwoElementary { .. } => "NotTwoElementary",
            Error::GroupTooLarge { .. } => "GroupTooLarge",
            Error::NotIsotropic(_) => "NotIsotropic",
            Error::NotFiniteIndex(_) => "NotFiniteIndex",
            Error::DependentVectors => "DependentVectors",
            Error::WrongSignature { .. } => "WrongSignature",
            Error::RankOutOfRange(_) => "RankOutOfRange",
            Error::NonPositiveD(_) => "NonPositiveD",
            Error::InvalidDiscriminant(_) => "InvalidDiscriminant",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NotHalfScalable { .. } => "NotHalfScalable",
            Error::RankTooLarge { .. } => "RankTooLarge",
            Error::UnknownName(_) => "UnknownName",
            Error::BadParameter { .. } => "BadParameter",
            Error::Syntax { .. } => "SyntaxError",
            Error::InvalidForm(_) => "InvalidForm",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
