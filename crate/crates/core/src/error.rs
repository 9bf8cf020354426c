use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyDimension,
    #[error("dimension {0} exceeds the supported index range")]
    TooLarge(usize),
    #[error("non-finite value")]
    NonFinite,
    #[error("entry ({row}, {col}) outside a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("malformed CSR: {0}")]
    MalformedCsr(String),
    #[error("diagonal entry {index} is not strictly positive ({value})")]
    NonPositiveDiagonal { index: usize, value: f64 },
}

#[derive(Debug, Error)]
pub enum MmioError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported MatrixMarket header: {0}")]
    Header(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Error)]
pub enum EigError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid Lanczos parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite arithmetic in Lanczos iteration")]
    NonFinite,
    #[error("repeated breakdown: no nonzero start vector found")]
    Breakdown,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("simplex iteration limit {0} exceeded")]
    IterationLimit(usize),
    #[error("singular basis encountered")]
    SingularBasis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Mmio(#[from] MmioError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("basis does not span the all-ones vector")]
    NoIdentityCombo,
    #[error("lambda_min estimate must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("extracted point fails verification: block {block:?} lambda_min {lambda} below {threshold}")]
    VerificationFailed {
        block: crate::operator::Block,
        lambda: f64,
        threshold: f64,
    },
    #[error("LP stayed unbounded after {0} random cuts; the subspace likely holds no positive preconditioner")]
    UnboundednessCapExceeded(usize),
    #[error("no LP solve succeeded: {0}")]
    LpFailure(String),
    #[error("solution not converged")]
    NotConverged,
    #[error("zero dual diagonal")]
    ZeroDualDiagonal,
    #[error("preconditioner has nonpositive entries after fallback")]
    NonPositivePreconditioner,
    #[error("non-finite value during {0}")]
    Breakdown(&'static str),
}

impl Error {
    /// Whether the failure stems from invalid user input rather than solver behavior.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Operator(_)
                | Error::Mmio(_)
                | Error::InvalidArgument(_)
                | Error::DependentBasis
                | Error::NoIdentityCombo
                | Error::Eig(EigError::InvalidParameter(_))
                | Error::Lp(LpError::Malformed(_))
        )
    }

    /// Whether the failure is a solver that did not reach its tolerance.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(
            self,
            Error::UnboundednessCapExceeded(_)
                | Error::NotConverged
                | Error::LpFailure(_)
                | Error::Lp(LpError::IterationLimit(_))
                | Error::VerificationFailed { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
