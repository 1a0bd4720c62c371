//! Dense square matrices over the supertropical scalars.
//!
//! The determinant here is the permanent: the sum over all permutations of
//! the entry track each permutation selects. Its variant carries the
//! singularity information — tangible means one dominant track, ghost means
//! a tie between tracks (or a ghost on the dominant track), `-inf` means no
//! finite track at all. Everything downstream (classification, adjoint,
//! quasi-inverse, star) leans on that exact bookkeeping.
//!
//! Entry access is one-based in the public interface; internal storage is
//! zero-based row-major.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;

use crate::assignment::{best_avoiding, max_assignment};
use crate::error::{Error, Result};
use crate::perm::{for_each_permutation, Permutation};
use crate::scalar::Scalar;

/// Largest dimension for which determinants enumerate all of `S_n`.
/// Past this, an assignment solver plus a second-best probe take over.
pub const ENUMERATION_LIMIT: usize = 8;

/// Which semantics an operation runs under: the full supertropical semiring,
/// or its tropical (ghost-free, max-plus) projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Supertropical,
    Tropical,
}

/// The three-way singularity classification by determinant variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityClass {
    /// Tangible determinant: a unique dominant permutation track.
    NonSingular,
    /// Ghost determinant: tied dominant tracks, or a ghost on the track.
    Singular,
    /// Determinant `-inf`: every track hits a `-inf` entry.
    StrictlySingular,
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityClass::NonSingular => write!(f, "nonsingular"),
            SingularityClass::Singular => write!(f, "singular"),
            SingularityClass::StrictlySingular => write!(f, "strictly-singular"),
        }
    }
}

/// The determinant together with the permutations attaining its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominantTrackReport {
    /// The determinant.
    pub weight: Scalar,
    /// Maximizing permutations in lexicographic order. Empty iff the matrix
    /// is strictly singular. Above [`ENUMERATION_LIMIT`] only one
    /// representative is listed and `exhaustive` is false.
    pub permutations: Vec<Permutation>,
    /// Whether `permutations` lists every maximizer.
    pub exhaustive: bool,
    /// Whether more than one permutation attains the maximum.
    pub multiple: bool,
}

/// A dense `n x n` supertropical matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    /// Builds from rows; panics unless the rows form a nonempty square.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let n = rows.len();
        assert!(n >= 1, "matrices must have dimension at least 1");
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "rows must all have length {n}");
            entries.extend(row);
        }
        Matrix { n, entries }
    }

    /// Convenience builder from integer rows, with `None` as `-inf`.
    pub fn from_int_rows(rows: &[&[Option<i64>]]) -> Self {
        let conv = |cell: &Option<i64>| match cell {
            Some(v) => Scalar::int(*v),
            None => Scalar::NegInf,
        };
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(conv).collect()).collect())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        assert!(n >= 1);
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Matrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, |i, j| {
            if i == j {
                Scalar::one()
            } else {
                Scalar::NegInf
            }
        })
    }

    pub fn from_diagonal(diag: Vec<Scalar>) -> Self {
        let n = diag.len();
        let mut m = Matrix::from_fn(n, |_, _| Scalar::NegInf);
        for (i, d) in diag.into_iter().enumerate() {
            *m.at_mut(i, i) = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// One-based entry access.
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        assert!(
            i >= 1 && i <= self.n && j >= 1 && j <= self.n,
            "index out of range"
        );
        self.at(i - 1, j - 1)
    }

    pub(crate) fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.n + j]
    }

    pub(crate) fn at_mut(&mut self, i: usize, j: usize) -> &mut Scalar {
        &mut self.entries[i * self.n + j]
    }

    fn check_dim(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Entrywise supertropical sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(Matrix::from_fn(self.n, |i, j| {
            self.at(i, j) + other.at(i, j)
        }))
    }

    /// Semiring matrix product.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(Matrix::from_fn(self.n, |i, j| {
            let mut acc = Scalar::NegInf;
            for k in 0..self.n {
                acc = &acc + &(self.at(i, k) * other.at(k, j));
            }
            acc
        }))
    }

    /// Entrywise product with a scalar.
    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.at(i, j) * s)
    }

    /// Entrywise forgetful projection onto the tropical image.
    pub fn project(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.at(i, j).project())
    }

    /// Entrywise value equality, blind to the tangible/ghost distinction.
    pub fn nu_eq(&self, other: &Matrix) -> Result<bool> {
        self.check_dim(other)?;
        Ok((0..self.n * self.n).all(|k| self.entries[k].nu_eq(&other.entries[k])))
    }

    /// Entrywise ghost-surpassing.
    pub fn ghost_surpasses(&self, other: &Matrix) -> Result<bool> {
        self.check_dim(other)?;
        Ok((0..self.n * self.n).all(|k| self.entries[k].ghost_surpasses(&other.entries[k])))
    }

    /// The product of the entries selected by a permutation (given as a
    /// zero-based image table).
    pub(crate) fn track_product(&self, images: &[usize]) -> Scalar {
        let mut acc = Scalar::one();
        for (i, &j) in images.iter().enumerate() {
            if self.at(i, j).is_neg_inf() {
                return Scalar::NegInf;
            }
            acc = &acc * self.at(i, j);
        }
        acc
    }

    /// The tropical determinant (the permanent). Exact ghost bookkeeping:
    /// ties between maximal tracks and ghosts on the maximal track both
    /// surface as a ghost result.
    pub fn determinant(&self) -> Scalar {
        if self.n <= ENUMERATION_LIMIT {
            self.determinant_by_enumeration()
        } else {
            self.determinant_by_assignment()
        }
    }

    pub(crate) fn determinant_by_enumeration(&self) -> Scalar {
        let mut det = Scalar::NegInf;
        for_each_permutation(self.n, |images| {
            det = &det + &self.track_product(images);
        });
        det
    }

    fn nu_weights(&self) -> Vec<Vec<Option<BigRational>>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.at(i, j).value().cloned())
                    .collect()
            })
            .collect()
    }

    /// Assignment-based determinant for large dimensions: one max-weight
    /// matching gives the value; a second-best probe along the optimal track
    /// decides whether another permutation ties it.
    pub(crate) fn determinant_by_assignment(&self) -> Scalar {
        let weights = self.nu_weights();
        let Some((perm, weight)) = max_assignment(&weights) else {
            return Scalar::NegInf;
        };
        let track = self.track_product(perm.images());
        if track.is_ghost() {
            return track;
        }
        let tied = (0..self.n)
            .any(|i| best_avoiding(&weights, i, perm.apply(i)).as_ref() == Some(&weight));
        if tied {
            Scalar::Ghost(weight)
        } else {
            Scalar::Tangible(weight)
        }
    }

    pub fn classify(&self) -> SingularityClass {
        match self.determinant() {
            Scalar::Tangible(_) => SingularityClass::NonSingular,
            Scalar::Ghost(_) => SingularityClass::Singular,
            Scalar::NegInf => SingularityClass::StrictlySingular,
        }
    }

    /// The determinant together with every permutation attaining it (all of
    /// them below [`ENUMERATION_LIMIT`]; one representative above).
    pub fn dominant_tracks(&self) -> DominantTrackReport {
        if self.n <= ENUMERATION_LIMIT {
            let weight = self.determinant_by_enumeration();
            let mut permutations = Vec::new();
            if let Some(target) = weight.value() {
                for_each_permutation(self.n, |images| {
                    if self.track_product(images).value() == Some(target) {
                        permutations.push(Permutation::from_images(images.to_vec()));
                    }
                });
            }
            let multiple = permutations.len() > 1;
            DominantTrackReport {
                weight,
                permutations,
                exhaustive: true,
                multiple,
            }
        } else {
            let weights = self.nu_weights();
            match max_assignment(&weights) {
                None => DominantTrackReport {
                    weight: Scalar::NegInf,
                    permutations: Vec::new(),
                    exhaustive: true,
                    multiple: false,
                },
                Some((perm, weight)) => {
                    let tied = (0..self.n).any(|i| {
                        best_avoiding(&weights, i, perm.apply(i)).as_ref() == Some(&weight)
                    });
                    let track = self.track_product(perm.images());
                    let det = if tied || track.is_ghost() {
                        Scalar::Ghost(weight)
                    } else {
                        Scalar::Tangible(weight)
                    };
                    DominantTrackReport {
                        weight: det,
                        permutations: vec![perm],
                        exhaustive: false,
                        multiple: tied,
                    }
                }
            }
        }
    }

    /// The matrix with row `drop_row` and column `drop_col` removed
    /// (zero-based); requires `n >= 2`.
    pub(crate) fn minor(&self, drop_row: usize, drop_col: usize) -> Matrix {
        assert!(self.n >= 2);
        Matrix::from_fn(self.n - 1, |i, j| {
            let src_i = if i < drop_row { i } else { i + 1 };
            let src_j = if j < drop_col { j } else { j + 1 };
            self.at(src_i, src_j).clone()
        })
    }

    /// The adjoint: entry `(i, j)` is the determinant of the minor obtained
    /// by deleting row `j` and column `i`. For `n = 1` it degenerates to
    /// `[[1]]` so that `A adj(A) = det(A) I` still holds.
    pub fn adjoint(&self) -> Matrix {
        if self.n == 1 {
            return Matrix::identity(1);
        }
        Matrix::from_fn(self.n, |i, j| self.minor(j, i).determinant())
    }

    /// The quasi-inverse `adj(A) / det(A)`.
    ///
    /// Supertropically it exists only for nonsingular matrices. Under
    /// tropical semantics the input is projected first and any not strictly
    /// singular matrix qualifies; the projected determinant is the divisor.
    pub fn quasi_inverse(&self, mode: Mode) -> Result<Matrix> {
        match mode {
            Mode::Supertropical => {
                let det = self.determinant();
                if !det.is_tangible() {
                    return Err(Error::NotInvertibleDeterminant);
                }
                Ok(self.adjoint().scale(&det.inv()?))
            }
            Mode::Tropical => {
                let projected = self.project();
                let det = projected.determinant().project();
                if det.is_neg_inf() {
                    return Err(Error::NotInvertibleDeterminant);
                }
                Ok(projected.adjoint().scale(&det.inv()?))
            }
        }
    }

    pub fn pow(&self, k: u32) -> Matrix {
        let mut acc = Matrix::identity(self.n);
        for _ in 0..k {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    pub fn diagonal_is_one(&self) -> Result<()> {
        for i in 0..self.n {
            if !self.at(i, i).is_one() {
                return Err(Error::DiagonalNotOne { row: i + 1 });
            }
        }
        Ok(())
    }

    /// Whether the diagonal is exactly `1` and no permutation track exceeds
    /// it, i.e. the determinant's value is `0`.
    pub fn is_normal_form(&self) -> bool {
        self.diagonal_is_one().is_ok() && self.determinant().value().is_some_and(|v| v.is_zero())
    }

    /// The Kleene star, a tropical construct: partial sums of powers of the
    /// projected matrix, iterated to their fixpoint. Requires `1` on the
    /// diagonal. For a matrix in normal form the fixpoint is reached by the
    /// `(n-1)`-th partial sum; inputs whose tracks exceed `1` pass the
    /// diagonal check but keep growing, which the cap turns into an error.
    pub fn kleene_star(&self, cap: u32) -> Result<Matrix> {
        self.diagonal_is_one()?;
        self.kleene_star_unchecked(cap)
    }

    /// Star iteration without the diagonal precondition check.
    pub fn kleene_star_unchecked(&self, cap: u32) -> Result<Matrix> {
        let base = self.project();
        let mut power = Matrix::identity(self.n);
        let mut sum = Matrix::identity(self.n);
        for _ in 0..cap {
            power = power.mul(&base)?.project();
            let next = sum.add(&power)?.project();
            if next == sum {
                return Ok(sum);
            }
            sum = next;
        }
        Err(Error::NotStabilized { cap })
    }

    /// Upper/lower triangularity; a diagonal matrix reports as upper.
    pub fn triangularity(&self) -> Option<Triangularity> {
        let below_clear = (0..self.n).all(|i| (0..i).all(|j| self.at(i, j).is_neg_inf()));
        if below_clear {
            return Some(Triangularity::Upper);
        }
        let above_clear = (0..self.n).all(|i| (i + 1..self.n).all(|j| self.at(i, j).is_neg_inf()));
        if above_clear {
            return Some(Triangularity::Lower);
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangularity {
    Upper,
    Lower,
}

impl fmt::Display for Matrix {
    /// The matrix file format: the dimension on the first line, then `n`
    /// lines of `n` whitespace-separated scalars.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Matrix {
    type Err = Error;

    /// Reads the matrix file format; arbitrary whitespace separates tokens.
    fn from_str(s: &str) -> Result<Matrix> {
        let mut tokens = s.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty matrix input".into()))?
            .parse()
            .map_err(|_| Error::Parse("matrix dimension must be a positive integer".into()))?;
        if n == 0 {
            return Err(Error::Parse("matrix dimension must be at least 1".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for k in 0..n * n {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {} entries, found {k}", n * n)))?;
            entries.push(tok.parse::<Scalar>()?);
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse(format!("trailing token `{extra}`")));
        }
        Ok(Matrix { n, entries })
    }
}
