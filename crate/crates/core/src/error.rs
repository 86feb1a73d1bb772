use thiserror::Error;

/// Every failure the library can report.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// parse errors, math-domain errors and exceeded resource caps.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("defining polynomial is not monic")]
    NonMonic,
    #[error("defining polynomial must have degree at least 1")]
    ZeroDegree,
    #[error("defining polynomial is reducible over the rationals: {0}")]
    ReduciblePolynomial(String),
    #[error("defining polynomial degree {0} exceeds the supported maximum of {1}")]
    DegreeTooLarge(usize, usize),
    #[error("an integral basis must be supplied for this field ({0})")]
    IntegralBasisRequired(String),
    #[error("invalid integral basis: {0}")]
    InvalidIntegralBasis(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different number fields")]
    FieldMismatch,
    #[error("all coordinates are zero")]
    AllZero,
    #[error("element is not integral in the chosen integral basis")]
    NotIntegral,
    #[error("precision cap of {0} bits exceeded")]
    PrecisionCapExceeded(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("root-of-unity order exceeds the bound {0} for this field")]
    TorsionBoundExceeded(u64),
    #[error("too many terms in one component: {0} (cap {1})")]
    TooManyTerms(usize, usize),
    #[error("matrix is not semisimple")]
    NotSemisimple,
    #[error("eigenvalues are not in the working field; irreducible factors: {}", .0.join(", "))]
    EigenvaluesNotInField(Vec<String>),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("box with {0} cells exceeds the cap of {1}")]
    BoxTooLarge(u128, u128),
    #[error("thresholds must be strictly increasing and greater than 1")]
    NonMonotoneThresholds,
    #[error("operation requires the rational field")]
    UnsupportedField,
    #[error("exponent box with {0} tuples exceeds the cap of {1}")]
    ExponentBoxTooLarge(u128, u128),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{name}` at {line}:{col}")]
    UnknownSymbol { name: String, line: usize, col: usize },
    #[error("linear-form coefficient must be an integer at {line}:{col}")]
    NonIntegerExponentCoefficient { line: usize, col: usize },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    MathDomain,
    CapExceeded,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Syntax { .. } | UnknownSymbol { .. } | NonIntegerExponentCoefficient { .. } => {
                ErrorClass::Parse
            }
            PrecisionCapExceeded(_)
            | BoxTooLarge(..)
            | ExponentBoxTooLarge(..)
            | TooManyTerms(..)
            | DegreeTooLarge(..) => ErrorClass::CapExceeded,
            _ => ErrorClass::MathDomain,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NonMonic => "NonMonic",
            ZeroDegree => "ZeroDegree",
            ReduciblePolynomial(_) => "ReduciblePolynomial",
            DegreeTooLarge(..) => "DegreeTooLarge",
            IntegralBasisRequired(_) => "IntegralBasisRequired",
            InvalidIntegralBasis(_) => "InvalidIntegralBasis",
            DivisionByZero => "DivisionByZero",
            FieldMismatch => "FieldMismatch",
            AllZero => "AllZero",
            NotIntegral => "NotIntegral",
            PrecisionCapExceeded(_) => "PrecisionCapExceeded",
            DimensionMismatch(_) => "DimensionMismatch",
            TorsionBoundExceeded(_) => "TorsionBoundExceeded",
            TooManyTerms(..) => "TooManyTerms",
            NotSemisimple => "NotSemisimple",
            EigenvaluesNotInField(_) => "EigenvaluesNotInField",
            NotInvertible => "NotInvertible",
            NotUnipotent => "NotUnipotent",
            BoxTooLarge(..) => "BoxTooLarge",
            NonMonotoneThresholds => "NonMonotoneThresholds",
            UnsupportedField => "UnsupportedField",
            ExponentBoxTooLarge(..) => "ExponentBoxTooLarge",
            InvalidArgument(_) => "InvalidArgument",
            Syntax { .. } => "SyntaxError",
            UnknownSymbol { .. } => "UnknownSymbol",
            NonIntegerExponentCoefficient { .. } => "NonIntegerExponentCoefficient",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
