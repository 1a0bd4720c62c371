use std::fmt;

use crate::factor::NonFactorizabilityWitness;

/// Everything that can go wrong inside the library.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Two operands (or a factor list) disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// Inversion of a ghost scalar.
    GhostNotInvertible,
    /// Inversion of `-inf`.
    ZeroNotInvertible,
    /// A quasi-inverse or normal form was requested for a matrix whose
    /// determinant is not invertible under the requested semantics.
    NotInvertibleDeterminant,
    /// The operation is undefined for strictly singular input.
    StrictlySingularInput,
    /// A Kleene star was requested for a matrix whose diagonal is not `1`.
    DiagonalNotOne { row: usize },
    /// Star iteration kept growing past the given cap.
    NotStabilized { cap: u32 },
    /// Triangular factorization of a non-triangular matrix.
    NotTriangular,
    /// Triangular factorization needs a tangible diagonal.
    NonTangibleDiagonal { row: usize },
    /// The matrix does not have exactly one tangible entry per row and column.
    NotInvertibleShape,
    /// The operation requires a matrix in normal form.
    NotNormalForm,
    /// A scale or add-multiple coefficient must be tangible.
    NonTangibleCoefficient,
    /// The matrix is not factorizable; carries the structural witness.
    NotFactorizable(NonFactorizabilityWitness),
    /// The brute-force oracle refuses dimensions past its enumeration bound.
    DimensionTooLarge { n: usize, max: usize },
    /// `run_property` was asked for a suite that is not registered.
    UnknownProperty(String),
    /// Rejection sampling gave up before finding a conforming matrix.
    GeneratorExhausted,
    /// A scalar, matrix, or factorization file failed to parse.
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::GhostNotInvertible => write!(f, "ghost scalars are not invertible"),
            Error::ZeroNotInvertible => write!(f, "-inf is not invertible"),
            Error::NotInvertibleDeterminant => {
                write!(
                    f,
                    "determinant is not invertible under the requested semantics"
                )
            }
            Error::StrictlySingularInput => write!(f, "input is strictly singular"),
            Error::DiagonalNotOne { row } => {
                write!(f, "diagonal entry in row {row} is not 1")
            }
            Error::NotStabilized { cap } => {
                write!(f, "star iteration did not stabilize within {cap} steps")
            }
            Error::NotTriangular => write!(f, "matrix is not triangular"),
            Error::NonTangibleDiagonal { row } => {
                write!(f, "diagonal entry in row {row} is not tangible")
            }
            Error::NotInvertibleShape => {
                write!(
                    f,
                    "matrix is not a tangible monomial (permutation x diagonal) matrix"
                )
            }
            Error::NotNormalForm => write!(f, "matrix is not in normal form"),
            Error::NonTangibleCoefficient => {
                write!(f, "elementary coefficients must be tangible")
            }
            Error::NotFactorizable(w) => write!(f, "not factorizable: {w}"),
            Error::DimensionTooLarge { n, max } => {
                write!(f, "dimension {n} exceeds the enumeration bound {max}")
            }
            Error::UnknownProperty(name) => write!(f, "unknown property suite `{name}`"),
            Error::GeneratorExhausted => {
                write!(f, "generator exhausted its rejection budget")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
