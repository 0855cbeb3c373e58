use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("sampling budget too small: need at least {needed}, got {got}")]
    BudgetTooSmall { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact operator norm for {0} would enumerate too many vertices")]
    TooManyVertices(String),

    #[error("blend radii must satisfy 0 < a < b (got a = {a}, b = {b})")]
    BlendRadii { a: String, b: String },

    #[error("blend component is nonzero at the origin")]
    BlendNonzeroAtOrigin,

    #[error("patch overlap between patches {0} and {1}")]
    PatchOverlap(usize, usize),

    #[error("patch {index} does not match the outer function on its sphere (gap {gap})")]
    PatchMismatch { index: usize, gap: String },

    #[error("patch {0} escapes the domain interior")]
    PatchEscapesDomain(usize),

    #[error("malformed artifact: {0}")]
    MalformedArtifact(String),

    #[error("unknown schema version {0:?}")]
    UnknownSchema(String),

    #[error("net seed set is not {delta}-separated")]
    SeedNotSeparated { delta: String },

    #[error("point set is empty")]
    EmptySet,

    #[error("zero separation: the point set has a repeated point")]
    ZeroSeparation,

    #[error("zero margin: a point lies on the domain boundary")]
    ZeroMargin,

    #[error("operator too large: norm {norm} exceeds {limit}")]
    OperatorTooLarge { norm: f64, limit: String },

    #[error("function is not certified 1-Lipschitz (certificate {0})")]
    NotOneLipschitz(f64),

    #[error("move not nested in the previous ball (round {round})")]
    MoveNotNested { round: usize },

    #[error("probe ball of radius {radius} around the point escapes the domain")]
    BallEscapesDomain { radius: String },

    #[error("radius must be positive")]
    NonPositiveRadius,

    #[error("replay exhausted after {0} rounds")]
    ReplayExhausted(usize),

    #[error("codomain must be one-dimensional, found {0}")]
    NotScalar(usize),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("round {round}: {source}")]
    Round { round: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn in_round(self, round: usize) -> Error {
        match self {
            e @ Error::Round { .. } => e,
            e => Error::Round { round, source: Box::new(e) },
        }
    }
}
