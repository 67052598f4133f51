use alloc::string::String;
use core::fmt;

/// Errors reported by construction, validation and solver routines.
///
/// Validation failures (bad inputs, dimension mismatches, violated
/// preconditions) are distinguished from computation failures (solver
/// breakdown, conditioning on an empty set) so that callers can map them
/// to different exit paths.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Two objects that must live on the same alphabet have different sizes.
    DimensionMismatch { expected: usize, got: usize },
    /// A pmf weight is negative, NaN or infinite.
    InvalidWeight { index: usize, value: f64 },
    /// Pmf weights do not sum to 1 within the requested tolerance.
    MassNotNormalized { sum: f64, tolerance: f64 },
    /// A pmf has no strictly positive weight.
    EmptySupport,
    /// Alphabet letters are not pairwise distinct.
    DuplicateLetter(String),
    /// Count vector does not sum to the declared n, or n = 0.
    InvalidCounts { sum: u64, n: u64 },
    /// Scaling factor k of a k-equivalent type must be positive.
    ZeroScale,
    /// A prior has no atoms, a non-positive weight, or weights far from sum 1.
    InvalidPrior(String),
    /// A set expression cannot be used where a convex polytope is required.
    UnsupportedSetExpression(&'static str),
    /// Constraints admit no feasible point (or none on the required support).
    InfeasibleConstraints(String),
    /// The requested projection needs positive source mass that is absent.
    SupportCondition(String),
    /// Iterative solver failed to converge; residual is the best achieved.
    SolverFailure { iterations: u32, residual: f64, detail: String },
    /// The conditioning set carries zero posterior mass.
    ConditioningOnNull,
    /// The feasible source set of a MAP query is empty.
    EmptyFeasibleSet,
    /// Static-mode sample sizes must be exact multiples of the base size.
    SubsequenceViolation { n: u64, n0: u64 },
    /// A partition is structurally invalid (too few cells, bad cut order).
    InvalidPartition(String),
    /// Catch-all for invalid scalar parameters (radius, tolerance, ...).
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidWeight { index, value } => {
                write!(f, "invalid weight {value} at index {index}")
            }
            Error::MassNotNormalized { sum, tolerance } => {
                write!(f, "weights sum to {sum}, outside tolerance {tolerance} of 1")
            }
            Error::EmptySupport => write!(f, "pmf has empty support"),
            Error::DuplicateLetter(l) => write!(f, "duplicate alphabet letter {l:?}"),
            Error::InvalidCounts { sum, n } => {
                write!(f, "counts sum to {sum}, expected n = {n} > 0")
            }
            Error::ZeroScale => write!(f, "scaling factor k must be positive"),
            Error::InvalidPrior(why) => write!(f, "invalid prior: {why}"),
            Error::UnsupportedSetExpression(why) => {
                write!(f, "unsupported set expression: {why}")
            }
            Error::InfeasibleConstraints(why) => write!(f, "infeasible constraints: {why}"),
            Error::SupportCondition(why) => write!(f, "support condition violated: {why}"),
            Error::SolverFailure { iterations, residual, detail } => write!(
                f,
                "solver failed after {iterations} iterations (residual {residual:e}): {detail}"
            ),
            Error::ConditioningOnNull => {
                write!(f, "conditioning set has zero posterior mass")
            }
            Error::EmptyFeasibleSet => write!(f, "feasible source set is empty"),
            Error::SubsequenceViolation { n, n0 } => write!(
                f,
                "static schedule requires n to be a multiple of the base size: {n} % {n0} != 0"
            ),
            Error::InvalidPartition(why) => write!(f, "invalid partition: {why}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
