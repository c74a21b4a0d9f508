use thiserror::Error;

/// Every failure mode exposed by the library.
///
/// The CLI maps these onto stable exit codes (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {p}^{k} exceeds the arithmetic ceiling 2^48")]
    DegreeTooLarge { p: u64, k: u32 },
    #[error("{sub} is not a divisor of the extension degree {k}")]
    NotADivisor { sub: u32, k: u32 },
    #[error("zero has no multiplicative order")]
    ZeroElement,
    #[error("GF({sub}) is not a subfield of GF({big})")]
    NotASubfield { sub: u64, big: u64 },
    #[error("polynomial is constant")]
    ConstantPolynomial,
    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("scalar is not in the admissible subgroup Z")]
    NotInZ,
    #[error("o = {o} is divisible by the characteristic {p}")]
    OrderDivisibleByP { o: u64, p: u64 },
    #[error("the given scalars do not form a subgroup")]
    NotASubgroup,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("permutation degrees differ ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("enumeration budget exceeded: {needed} candidates > {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("unsupported characteristic: {0}")]
    UnsupportedCharacteristic(String),
    #[error("bad parity: {0}")]
    BadParity(String),
    #[error("tuple is not self-paired: {0}")]
    NotSelfPaired(String),
    #[error("element or tuple is not semisimple")]
    NotSemisimple,
    #[error("tuple incompatible with form kind: {0}")]
    KindMismatch(String),
    #[error("elements belong to different forms")]
    MixedForms,
    #[error("report is not fully enumerated")]
    NotEnumerated,
    #[error("group is not abelian")]
    NotAbelian,
    #[error("element of T does not stabilize the invariant tuple")]
    TNotStabilizing,
    #[error("o = {o} and q = {q} are not coprime")]
    NotCoprime { o: u64, q: u64 },
    #[error("coprimality violated: {0}")]
    CoprimalityViolated(String),
    #[error("pair is not one of the witness constructions: {0}")]
    NotAProofCase(String),
    #[error("no multiplicity assignment with trivial stabilizer found")]
    StabilizerNotTrivial,
    #[error("not an isometry of the form")]
    NotAnIsometry,
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// 2 parse, 3 budget, 4 precondition, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::BudgetExceeded { .. } => 3,
            Error::NotCoprime { .. }
            | Error::CoprimalityViolated(_)
            | Error::NotPrime(_)
            | Error::DegreeTooLarge { .. }
            | Error::NotADivisor { .. }
            | Error::NotASubfield { .. }
            | Error::ConstantPolynomial
            | Error::ZeroConstantTerm
            | Error::ZeroScalar
            | Error::ZeroElement
            | Error::NotInZ
            | Error::OrderDivisibleByP { .. }
            | Error::NotASubgroup
            | Error::DimensionMismatch(_)
            | Error::Singular
            | Error::DegreeMismatch(..)
            | Error::UnsupportedCharacteristic(_)
            | Error::BadParity(_)
            | Error::NotSelfPaired(_)
            | Error::NotSemisimple
            | Error::KindMismatch(_)
            | Error::MixedForms
            | Error::NotAProofCase(_)
            | Error::NotAnIsometry
            | Error::TNotStabilizing => 4,
            Error::NotEnumerated | Error::NotAbelian | Error::StabilizerNotTrivial => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
