use thiserror::Error;

/// Every failure the library reports. `code()` gives the stable diagnostic tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclotomic modulus must be positive")]
    ZeroModulus,
    #[error("not a rational literal: {0:?}")]
    BadRational(String),
    #[error("cannot embed Q(zeta_{from}) into Q(zeta_{to}): {from} does not divide {to}")]
    EmbedNotDivisible { from: u32, to: u32 },

    #[error("d^2 of generator {generator} is nonzero: {witness}")]
    D2Nonzero { generator: String, witness: String },
    #[error("d of relation #{relation} leaves the ideal in degree {degree}")]
    IdealNotStable { relation: usize, degree: usize },
    #[error("relation #{relation} is not homogeneous")]
    InhomogeneousRelation { relation: usize },
    #[error("elements belong to different algebras")]
    ParentMismatch,
    #[error("degree {degree} exceeds the degree cap {cap}")]
    CapExceeded { degree: usize, cap: usize },
    #[error("generator {generator} has no declared conjugate")]
    NoConjugateDeclared { generator: String },
    #[error("degree cap {cap} too low: need at least {needed}")]
    CapTooLow { needed: usize, cap: usize },
    #[error("a degree cap is required when even-degree generators are present")]
    CapRequired,
    #[error("element is not closed: d = {witness}")]
    NotClosed { witness: String },
    #[error("degree {degree} exceeds the computed range (max {max})")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("no volume monomial declared")]
    NoTopDeclared,
    #[error("map does not send relation #{relation} into the target ideal")]
    RelationNotPreserved { relation: usize },
    #[error("element does not lie in the subcomplex")]
    NotInSubcomplex,
    #[error("element was truncated at the degree cap")]
    Truncated,

    #[error("action is not a chain map on generator {generator}: {witness}")]
    NotChainMap { generator: String, witness: String },
    #[error("action has period {actual:?}, declared order {expected}")]
    OrderMismatch { expected: u32, actual: Option<u32> },
    #[error("action does not commute with conjugation on generator {generator}")]
    ConjugationBroken { generator: String },

    #[error("a-Massey product needs an even class, got degree {degree}")]
    OddADegree { degree: usize },
    #[error("higher Massey products of order {order} are not supported (4..=6)")]
    OrderUnsupported { order: usize },

    #[error("omega must have degree 2, got {degree}")]
    BadOmegaDegree { degree: usize },
    #[error("2n = {top} is not the top degree of the ring")]
    NoTop { top: usize },

    #[error("euler class is not closed: d = {witness}")]
    EulerNotClosed { witness: String },
    #[error("euler class must have degree 2, got {degree}")]
    EulerBadDegree { degree: usize },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("not cohomologically 1-connected: b_{degree} = {betti}")]
    NotOneConnected { degree: usize, betti: usize },

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(String),
    #[error("generator {0:?} must have positive degree")]
    BadDegree(String),
    #[error("bad conjugate pairing on {0:?}")]
    BadConjugate(String),
    #[error("element is not homogeneous of degree {expected}")]
    DegreeMismatch { expected: usize },
    #[error("invalid document: {0}")]
    Document(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroModulus => "ZERO_MODULUS",
            BadRational(_) => "BAD_RATIONAL",
            EmbedNotDivisible { .. } => "EMBED_NOT_DIVISIBLE",
            D2Nonzero { .. } => "D2_NONZERO",
            IdealNotStable { .. } => "IDEAL_NOT_STABLE",
            InhomogeneousRelation { .. } => "INHOMOGENEOUS_RELATION",
            ParentMismatch => "PARENT_MISMATCH",
            CapExceeded { .. } => "CAP_EXCEEDED",
            NoConjugateDeclared { .. } => "NO_CONJUGATE_DECLARED",
            CapTooLow { .. } => "CAP_TOO_LOW",
            CapRequired => "CAP_REQUIRED",
            NotClosed { .. } => "NOT_CLOSED",
            DegreeOverflow { .. } => "DEGREE_OVERFLOW",
            NoTopDeclared => "NO_TOP_DECLARED",
            RelationNotPreserved { .. } => "RELATION_NOT_PRESERVED",
            NotInSubcomplex => "NOT_IN_SUBCOMPLEX",
            Truncated => "TRUNCATED",
            NotChainMap { .. } => "NOT_CHAIN_MAP",
            OrderMismatch { .. } => "ORDER_MISMATCH",
            ConjugationBroken { .. } => "CONJUGATION_BROKEN",
            OddADegree { .. } => "ODD_A_DEGREE",
            OrderUnsupported { .. } => "ORDER_UNSUPPORTED",
            BadOmegaDegree { .. } => "BAD_OMEGA_DEGREE",
            NoTop { .. } => "NO_TOP",
            EulerNotClosed { .. } => "EULER_NOT_CLOSED",
            EulerBadDegree { .. } => "EULER_BAD_DEGREE",
            UnknownPreset(_) => "UNKNOWN_PRESET",
            NotOneConnected { .. } => "NOT_ONE_CONNECTED",
            UnknownGenerator(_) => "UNKNOWN_GENERATOR",
            DuplicateGenerator(_) => "DUPLICATE_GENERATOR",
            BadDegree(_) => "BAD_DEGREE",
            BadConjugate(_) => "BAD_CONJUGATE",
            DegreeMismatch { .. } => "DEGREE_MISMATCH",
            Document(_) => "BAD_DOCUMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
