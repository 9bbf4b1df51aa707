use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {column} of transition matrix sums to {sum} (tolerance 1e-9)")]
    NonStochastic { column: usize, sum: f64 },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("prior is not a probability vector: {0}")]
    InvalidPrior(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance is not positive semi-definite: {0}")]
    NotPsd(String),
    #[error("covariance is singular beyond jitter regularization")]
    SingularCovariance,
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("observation has zero evidence under every state")]
    ZeroEvidence,
    #[error("cost {0} lies outside [0, 1]")]
    CostOutOfRange(f64),
    #[error("lambda {0} lies outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("sensing budget must be positive")]
    BudgetZero,
    #[error("allocation is infeasible: {0}")]
    InfeasibleAllocation(String),
    #[error("AR coefficient {0} must satisfy |phi| < 1")]
    InvalidAr(f64),
    #[error("invalid variance: {0}")]
    InvalidVariance(String),
    #[error("unknown control id {0}")]
    UnknownControl(usize),
    #[error("stage {stage} is outside horizon {horizon}")]
    StageOutOfRange { stage: usize, horizon: usize },
    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("scenario is not two-state scalar")]
    NotTwoStateScalar,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),
    #[error("two-state scenario required")]
    NotTwoState,
    #[error("quadrature unstable: {0}")]
    QuadratureUnstable(String),
    #[error("accumulator required for this strategy")]
    MissingAccumulator,
    #[error("information must be positive, got {0}")]
    NonpositiveInformation(f64),
    #[error("test point is degenerate")]
    DegenerateTestPoint,
    #[error("information recursion became non-positive ({0})")]
    DegenerateRecursion(f64),
    #[error("every test point pair is degenerate")]
    AllTestPointsDegenerate,
    #[error("interpolation requested outside the simplex")]
    OutsideSimplex,
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parse error at line {line}, field '{field}': {message}")]
    ParseError { line: usize, field: String, message: String },
    #[error("validation error ({invariant}): {message}")]
    ValidationError { invariant: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI: 1 for validation problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularCovariance
            | Error::SingularInnovation
            | Error::ZeroEvidence
            | Error::GridTooLarge { .. }
            | Error::DegenerateTestPoint
            | Error::DegenerateRecursion(_)
            | Error::AllTestPointsDegenerate
            | Error::OutsideSimplex
            | Error::DegenerateKernel(_)
            | Error::QuadratureUnstable(_)
            | Error::NonpositiveInformation(_) => 2,
            _ => 1,
        }
    }

    /// Short invariant name used in validation messages.
    pub fn invariant(&self) -> &'static str {
        match self {
            Error::NonStochastic { .. } => "NonStochastic",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::InvalidPrior(_) => "InvalidPrior",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotPsd(_) => "NotPsd",
            Error::SingularCovariance => "SingularCovariance",
            Error::SingularInnovation => "SingularInnovation",
            Error::ZeroEvidence => "ZeroEvidence",
            Error::CostOutOfRange(_) => "CostOutOfRange",
            Error::LambdaOutOfRange(_) => "LambdaOutOfRange",
            Error::BudgetZero => "BudgetZero",
            Error::InfeasibleAllocation(_) => "InfeasibleAllocation",
            Error::InvalidAr(_) => "InvalidAr",
            Error::InvalidVariance(_) => "InvalidVariance",
            Error::UnknownControl(_) => "UnknownControl",
            Error::StageOutOfRange { .. } => "StageOutOfRange",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidQuadrature(_) => "InvalidQuadrature",
            Error::NotTwoStateScalar => "NotTwoStateScalar",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::DegenerateKernel(_) => "DegenerateKernel",
            Error::NotTwoState => "NotTwoState",
            Error::QuadratureUnstable(_) => "QuadratureUnstable",
            Error::MissingAccumulator => "MissingAccumulator",
            Error::NonpositiveInformation(_) => "NonpositiveInformation",
            Error::DegenerateTestPoint => "DegenerateTestPoint",
            Error::DegenerateRecursion(_) => "DegenerateRecursion",
            Error::AllTestPointsDegenerate => "AllTestPointsDegenerate",
            Error::OutsideSimplex => "OutsideSimplex",
            Error::InvalidBelief(_) => "InvalidBelief",
            Error::InvalidScenario(_) => "InvalidScenario",
            Error::ParseError { .. } => "ParseError",
            Error::ValidationError { .. } => "ValidationError",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
