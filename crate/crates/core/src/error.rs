use thiserror::Error;

/// Every failure the library can report. Variant names double as the stable
/// error identifiers emitted by the command-line front end.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("cannot parse ring value {value:?}: {reason}")]
    ParseValue { value: String, reason: String },
    #[error("invalid proset: {0}")]
    InvalidProset(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("interval enumeration exceeded the element budget of {budget}")]
    LocalFinitenessBudgetExceeded { budget: usize },
    #[error("element {0} has an infinite neighborhood")]
    InfiniteNeighborhood(String),
    #[error("subset meets more than one component")]
    NotConnected,
    #[error("augmentation sets overlap at {0}")]
    OverlappingAugmentation(String),
    #[error("operands live over different prosets or rings")]
    IncompatibleOperands,
    #[error("{0} is not below {1}")]
    NotComparable(String, String),
    #[error("subset is not convex: {0}")]
    NotConvex(String),
    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("the coefficient ring has idempotents other than 0 and 1")]
    RingBooleanPartTooLarge,
    #[error("matrix is not idempotent")]
    NotIdempotent,
    #[error("element {0} is not in the diagonal support")]
    NotInDiagonalSupport(String),
    #[error("a poset is required: {0}")]
    PosetRequired(String),
    #[error("search budget of {budget} exhausted: {detail}")]
    SearchBudgetExceeded { budget: usize, detail: String },
    #[error("map is not order preserving at {0} <= {1}")]
    NotOrderPreserving(String, String),
    #[error("map sends a convex subset of component {component} to a non-convex set")]
    NotConvexImage { component: usize },
    #[error("component {component} is neither constant nor a convex embedding: {reason}")]
    NotFcc { component: usize, reason: String },
    #[error("maps are not composable")]
    NotComposable,
    #[error("maps are not parallel")]
    NotParallel,
    #[error("proset is not irreducible")]
    NotIrreducible,
    #[error("no admissible pair of classes splits the proset")]
    NoValidCutPair,
    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// The variant name, used as a machine-readable error code.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidRing(_) => "InvalidRing",
            Error::ParseValue { .. } => "ParseValue",
            Error::InvalidProset(_) => "InvalidProset",
            Error::UnknownElement(_) => "UnknownElement",
            Error::LocalFinitenessBudgetExceeded { .. } => "LocalFinitenessBudgetExceeded",
            Error::InfiniteNeighborhood(_) => "InfiniteNeighborhood",
            Error::NotConnected => "NotConnected",
            Error::OverlappingAugmentation(_) => "OverlappingAugmentation",
            Error::IncompatibleOperands => "IncompatibleOperands",
            Error::NotComparable(..) => "NotComparable",
            Error::NotConvex(_) => "NotConvex",
            Error::NotInvertible(_) => "NotInvertible",
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::RingBooleanPartTooLarge => "RingBooleanPartTooLarge",
            Error::NotIdempotent => "NotIdempotent",
            Error::NotInDiagonalSupport(_) => "NotInDiagonalSupport",
            Error::PosetRequired(_) => "PosetRequired",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::NotOrderPreserving(..) => "NotOrderPreserving",
            Error::NotConvexImage { .. } => "NotConvexImage",
            Error::NotFcc { .. } => "NotFcc",
            Error::NotComposable => "NotComposable",
            Error::NotParallel => "NotParallel",
            Error::NotIrreducible => "NotIrreducible",
            Error::NoValidCutPair => "NoValidCutPair",
            Error::Format(_) => "Format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
