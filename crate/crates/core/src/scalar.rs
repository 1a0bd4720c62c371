//! Scalars of the supertropical semiring over the rationals.
//!
//! The carrier is `T ∪ G ∪ {-inf}`: a tangible copy of the rationals, a ghost
//! copy of the rationals, and `-inf`. Addition takes the operand with the
//! larger value; a value tie collapses to the ghost of that value. Ghosts also
//! arise from the ghost map `nu` and absorb under multiplication, which adds
//! the underlying rationals. `-inf` is the additive identity and annihilates
//! products; the tangible `0` is the multiplicative identity.
//!
//! Values are exact rationals kept in reduced form, so scalar equality is
//! plain structural equality. There is no floating-point mode: singularity
//! detection rests on exact ties between permutation tracks, and a rounded
//! tie is a wrong answer, not an approximate one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// One supertropical scalar: tangible, ghost, or `-inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    /// The additive identity; absorbs every product.
    NegInf,
    /// An invertible element of the underlying ordered group.
    Tangible(BigRational),
    /// The ghost copy of a value; not invertible.
    Ghost(BigRational),
}

impl Scalar {
    pub fn tangible(value: BigRational) -> Self {
        Scalar::Tangible(value)
    }

    pub fn ghost(value: BigRational) -> Self {
        Scalar::Ghost(value)
    }

    /// Tangible integer, the common case in examples and tests.
    pub fn int(value: i64) -> Self {
        Scalar::Tangible(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn ghost_int(value: i64) -> Self {
        Scalar::Ghost(BigRational::from_integer(BigInt::from(value)))
    }

    /// Tangible `n/d`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Scalar::Tangible(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// The additive identity `-inf`.
    pub fn zero() -> Self {
        Scalar::NegInf
    }

    /// The multiplicative identity, the tangible rational `0`.
    pub fn one() -> Self {
        Scalar::Tangible(BigRational::zero())
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Scalar::NegInf)
    }

    pub fn is_tangible(&self) -> bool {
        matches!(self, Scalar::Tangible(_))
    }

    pub fn is_ghost(&self) -> bool {
        matches!(self, Scalar::Ghost(_))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Tangible(v) if v.is_zero())
    }

    /// The underlying value, ignoring the tangible/ghost distinction.
    /// `None` encodes `-inf`.
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            Scalar::NegInf => None,
            Scalar::Tangible(v) | Scalar::Ghost(v) => Some(v),
        }
    }

    /// The ghost map: tangibles become ghosts, ghosts and `-inf` are fixed.
    pub fn nu(&self) -> Self {
        match self {
            Scalar::NegInf => Scalar::NegInf,
            Scalar::Tangible(v) | Scalar::Ghost(v) => Scalar::Ghost(v.clone()),
        }
    }

    /// Equal values up to the tangible/ghost distinction.
    pub fn nu_eq(&self, other: &Scalar) -> bool {
        self.value() == other.value()
    }

    /// Total order on values with `-inf` at the bottom, blind to ghosting.
    pub fn nu_cmp(&self, other: &Scalar) -> Ordering {
        match (self.value(), other.value()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a.cmp(b),
        }
    }

    /// The ghost-surpassing relation: `self` equals `other`, or `self` is a
    /// ghost whose value is at least the value of `other`. This is the
    /// supertropical stand-in for equality (`a = b + ghost`); in particular
    /// `-inf` surpasses only `-inf`, while any ghost surpasses `-inf`.
    pub fn ghost_surpasses(&self, other: &Scalar) -> bool {
        if self == other {
            return true;
        }
        match self {
            Scalar::Ghost(v) => match other.value() {
                None => true,
                Some(w) => v >= w,
            },
            _ => false,
        }
    }

    /// Multiplicative inverse; only tangibles have one.
    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Tangible(v) => Ok(Scalar::Tangible(-v)),
            Scalar::Ghost(_) => Err(Error::GhostNotInvertible),
            Scalar::NegInf => Err(Error::ZeroNotInvertible),
        }
    }

    /// The forgetful projection onto the tropical (ghost-free) image:
    /// ghosts become tangible, everything else is fixed. A semiring
    /// homomorphism onto max-plus.
    pub fn project(&self) -> Self {
        match self {
            Scalar::Ghost(v) => Scalar::Tangible(v.clone()),
            other => other.clone(),
        }
    }

    /// `self` multiplied with itself `k` times; `pow(0)` is the identity.
    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Scalar {
    type Output = Scalar;

    /// Supertropical sum: the operand with the larger value wins; a value
    /// tie yields the ghost of that value; `-inf` is neutral.
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::NegInf, b) => b.clone(),
            (a, Scalar::NegInf) => a.clone(),
            (a, b) => {
                let (va, vb) = (a.value().unwrap(), b.value().unwrap());
                match va.cmp(vb) {
                    Ordering::Greater => a.clone(),
                    Ordering::Less => b.clone(),
                    Ordering::Equal => Scalar::Ghost(va.clone()),
                }
            }
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;

    /// Supertropical product: rational addition on values; ghost if either
    /// factor is ghost; `-inf` absorbs.
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::NegInf, _) | (_, Scalar::NegInf) => Scalar::NegInf,
            (a, b) => {
                let sum = a.value().unwrap() + b.value().unwrap();
                if a.is_ghost() || b.is_ghost() {
                    Scalar::Ghost(sum)
                } else {
                    Scalar::Tangible(sum)
                }
            }
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl fmt::Display for Scalar {
    /// Canonical text form: `3`, `-5/2` for tangibles, the same with a `g`
    /// suffix for ghosts, and `-inf`. Round-trips through [`Scalar::from_str`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::NegInf => write!(f, "-inf"),
            Scalar::Tangible(v) => write!(f, "{v}"),
            Scalar::Ghost(v) => write!(f, "{v}g"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scalar> {
        let s = s.trim();
        if s == "-inf" {
            return Ok(Scalar::NegInf);
        }
        let (body, ghost) = match s.strip_suffix('g') {
            Some(body) => (body, true),
            None => (s, false),
        };
        let value = parse_rational(body)?;
        Ok(if ghost {
            Scalar::Ghost(value)
        } else {
            Scalar::Tangible(value)
        })
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid scalar `{s}`"));
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = match denom {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(numer, denom))
}
