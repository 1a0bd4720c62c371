//! Normal forms and constructive factorizations into elementary matrices.
//!
//! Not every nonsingular matrix is a product of elementary matrices: without
//! subtraction a factorization can only grow entries, and some entries are too
//! small to ever be produced. The 2x2 case always works; the 3x3 case is
//! decided by the entry conditions of the normal form, where a nondiagonal
//! cycle that is strictly dominated at all three positions is an obstruction.
//! For every dimension the quasi-inverse is factorizable, and [`factor_star`]
//! builds that factorization minor by minor.

use std::fmt;

use crate::elementary::{eval_factors, ElementaryMatrix, Factorization, VerifyMode};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Mode, SingularityClass, Triangularity};
use crate::perm::Permutation;
use crate::scalar::Scalar;

/// A decomposition `A = P * Abar` with `P` invertible (one tangible entry per
/// row and column) and `Abar` in normal form: unit diagonal, every
/// permutation track dominated by `1`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    /// Swap/scale factorization of the invertible part; its target is `P`.
    pub p: Factorization,
    /// The normal form itself.
    pub abar: Matrix,
}

/// Structural evidence that a matrix is not factorizable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonFactorizabilityWitness {
    /// A nondiagonal 3-cycle whose entry conditions are all strict `<`.
    AllLessTrack { cycle: Permutation },
    /// The finite support is two disjoint permutation tracks, one a cyclic
    /// shift of the other by `t` not in `{0, n/2}`.
    ShiftPermutationPair {
        sigma: Permutation,
        pi: Permutation,
        shift: usize,
    },
}

impl fmt::Display for NonFactorizabilityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonFactorizabilityWitness::AllLessTrack { cycle } => {
                write!(f, "all-less-track: ")?;
                let mut at = 0usize;
                write!(f, "{}", at + 1)?;
                loop {
                    at = cycle.apply(at);
                    write!(f, "->{}", at + 1)?;
                    if at == 0 {
                        return Ok(());
                    }
                }
            }
            NonFactorizabilityWitness::ShiftPermutationPair { sigma, pi, shift } => {
                write!(f, "shift-pair: sigma={sigma} pi={pi} t={shift}")
            }
        }
    }
}

/// The relation between an off-diagonal entry and the product of the other
/// entry in its row with the other entry in its column, compared by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Less,
    Equal,
    Greater,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Less => write!(f, "<"),
            Relation::Equal => write!(f, "="),
            Relation::Greater => write!(f, ">"),
        }
    }
}

/// The entry conditions of a 3x3 normal form: for each off-diagonal `(i, j)`
/// the value `a_ij + a_ik a_kj` and its relation, with `1` on the diagonal.
/// These values coincide with the quasi-inverse of the normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryConditions {
    pub values: Matrix,
    relations: [[Option<Relation>; 3]; 3],
}

impl EntryConditions {
    /// One-based; `i != j`.
    pub fn relation(&self, i: usize, j: usize) -> Relation {
        self.relations[i - 1][j - 1].expect("off-diagonal position")
    }

    /// The relations as a displayable grid with `.` on the diagonal.
    pub fn render_relations(&self) -> String {
        let mut out = String::new();
        for i in 0..3 {
            for j in 0..3 {
                if j > 0 {
                    out.push(' ');
                }
                match self.relations[i][j] {
                    None => out.push('.'),
                    Some(rel) => out.push_str(&rel.to_string()),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// How a row of a normal form can be recovered by add-multiple operations
/// on the smaller minor, per the growth conditions of the star construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowRecovery {
    /// Every condition is strict, or ties land on ghost entries: recovery is
    /// exact over the supertropical semiring.
    Supertropical,
    /// Some tie lands on a tangible (or `-inf`) entry: recovery is exact only
    /// after tropical projection.
    TropicalOnly,
    /// Some condition fails outright.
    Fails,
}

/// The factorization of a quasi-inverse, with the prefix lengths that
/// complete each leading minor of the normal form's quasi-inverse.
#[derive(Clone, Debug)]
pub struct StarFactorization {
    pub factorization: Factorization,
    /// `(m, len)`: after the first `len` factors the product agrees with the
    /// `m x m` leading minor of `star_of_normal_form` (tropically), leaving
    /// all later rows and columns untouched.
    pub minor_prefixes: Vec<(usize, usize)>,
    /// The quasi-inverse of the normal form that the stages build.
    pub star_of_normal_form: Matrix,
}

/// Computes `A = P * Abar`: the lexicographically least dominant permutation
/// track is relocated to the diagonal and normalized to `1`.
///
/// Under supertropical semantics the input must be nonsingular, which makes
/// the dominant track unique and tangible and the decomposition exact over
/// the whole semiring. Under tropical semantics the input is projected first
/// and any not strictly singular matrix qualifies.
pub fn normal_form(a: &Matrix, mode: Mode) -> Result<NormalForm> {
    let a = match mode {
        Mode::Supertropical => a.clone(),
        Mode::Tropical => a.project(),
    };
    match a.classify() {
        SingularityClass::StrictlySingular => return Err(Error::StrictlySingularInput),
        SingularityClass::Singular if mode == Mode::Supertropical => {
            return Err(Error::NotInvertibleDeterminant)
        }
        _ => {}
    }
    let report = a.dominant_tracks();
    let pi = report
        .permutations
        .first()
        .cloned()
        .expect("a finite determinant has a maximizing track");
    let n = a.dim();
    let p_matrix = Matrix::from_fn(n, |i, j| {
        if j == pi.apply(i) {
            a.at(i, j).clone()
        } else {
            Scalar::NegInf
        }
    });
    let pi_inv = pi.inverse();
    let mut inv_track = Vec::with_capacity(n);
    for k in 0..n {
        inv_track.push(a.at(k, pi.apply(k)).inv()?);
    }
    let abar = Matrix::from_fn(n, |i, j| {
        let k = pi_inv.apply(i);
        a.at(k, j) * &inv_track[k]
    });
    let p = factor_invertible(&p_matrix)?;
    debug_assert_eq!(p_matrix.mul(&abar)?, a);
    debug_assert!(abar.is_normal_form());
    Ok(NormalForm { p, abar })
}

/// Splits an invertible matrix (one tangible entry per row and column) into
/// its diagonal and permutation parts, as zero-based images and row values.
fn monomial_parts(p: &Matrix) -> Result<(Permutation, Vec<Scalar>)> {
    let n = p.dim();
    let mut images = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut column_taken = vec![false; n];
    for i in 0..n {
        let mut found = None;
        for j in 0..n {
            match p.at(i, j) {
                Scalar::NegInf => {}
                Scalar::Tangible(_) if found.is_none() => found = Some(j),
                _ => return Err(Error::NotInvertibleShape),
            }
        }
        let j = found.ok_or(Error::NotInvertibleShape)?;
        if column_taken[j] {
            return Err(Error::NotInvertibleShape);
        }
        column_taken[j] = true;
        images.push(j);
        values.push(p.at(i, j).clone());
    }
    Ok((Permutation::from_images(images), values))
}

/// The inverse of an invertible matrix, built directly from its parts.
pub fn invert_monomial(p: &Matrix) -> Result<Matrix> {
    let (pi, values) = monomial_parts(p)?;
    let n = p.dim();
    let mut out = Matrix::from_fn(n, |_, _| Scalar::NegInf);
    for (i, value) in values.iter().enumerate() {
        *out.at_mut(pi.apply(i), i) = value.inv()?;
    }
    Ok(out)
}

/// Factors an invertible matrix into scales (ascending row order, identity
/// scales skipped) followed by swaps.
pub fn factor_invertible(p: &Matrix) -> Result<Factorization> {
    let (pi, values) = monomial_parts(p)?;
    let n = p.dim();
    let mut factors = Vec::new();
    for (i, value) in values.iter().enumerate() {
        if !value.is_one() {
            factors.push(ElementaryMatrix::scale(n, i + 1, value.clone())?);
        }
    }
    // Sort the permutation to the identity by transpositions, then read the
    // record backwards: that product rebuilds the permutation matrix.
    let mut images = pi.images().to_vec();
    let mut swaps = Vec::new();
    for i in 0..n {
        let v = images[i];
        if v == i {
            continue;
        }
        let j = (i + 1..n).find(|&j| images[j] == i).expect("bijection");
        images[i] = i;
        images[j] = v;
        swaps.push((i + 1, v + 1));
    }
    for (i, j) in swaps.into_iter().rev() {
        factors.push(ElementaryMatrix::swap(n, i, j)?);
    }
    let factorization = Factorization {
        factors,
        target: p.clone(),
        mode: VerifyMode::ExactSupertropical,
    };
    debug_assert!(factorization.verify()?);
    Ok(factorization)
}

/// Pushes an add-multiple onto the list; ghosts are emitted as the tangible
/// value twice (the doubled application sums to the ghost), `-inf` expands to
/// the identity and is skipped.
fn emit_add_multiple(
    factors: &mut Vec<ElementaryMatrix>,
    dim: usize,
    target: usize,
    source: usize,
    k: &Scalar,
) -> Result<()> {
    match k {
        Scalar::NegInf => {}
        Scalar::Tangible(_) => {
            factors.push(ElementaryMatrix::add_multiple(
                dim,
                target,
                source,
                k.clone(),
            )?);
        }
        Scalar::Ghost(_) => {
            let tangible = k.project();
            factors.push(ElementaryMatrix::add_multiple(
                dim,
                target,
                source,
                tangible.clone(),
            )?);
            factors.push(ElementaryMatrix::add_multiple(
                dim, target, source, tangible,
            )?);
        }
    }
    Ok(())
}

/// Factors a triangular matrix with tangible diagonal: scales normalize the
/// diagonal, then add-multiples rebuild one row after another, each drawing
/// only on rows that are still untouched identity rows.
pub fn factor_triangular(a: &Matrix) -> Result<Factorization> {
    let shape = a.triangularity().ok_or(Error::NotTriangular)?;
    let n = a.dim();
    for i in 0..n {
        if !a.at(i, i).is_tangible() {
            return Err(Error::NonTangibleDiagonal { row: i + 1 });
        }
    }
    let mut factors = Vec::new();
    for i in 0..n {
        if !a.at(i, i).is_one() {
            factors.push(ElementaryMatrix::scale(n, i + 1, a.at(i, i).clone())?);
        }
    }
    // Row-building operations in application order; the factor list reads in
    // the reverse order, since the rightmost factor acts first.
    let mut applied = Vec::new();
    match shape {
        Triangularity::Upper => {
            for i in 0..n {
                for j in i + 1..n {
                    let coeff = a.at(i, j) * &a.at(i, i).inv()?;
                    emit_add_multiple(&mut applied, n, i + 1, j + 1, &coeff)?;
                }
            }
        }
        Triangularity::Lower => {
            for i in (0..n).rev() {
                for j in 0..i {
                    let coeff = a.at(i, j) * &a.at(i, i).inv()?;
                    emit_add_multiple(&mut applied, n, i + 1, j + 1, &coeff)?;
                }
            }
        }
    }
    factors.extend(applied.into_iter().rev());
    let factorization = Factorization {
        factors,
        target: a.clone(),
        mode: VerifyMode::ExactSupertropical,
    };
    debug_assert!(factorization.verify()?);
    Ok(factorization)
}

/// Factors a 2x2 matrix: the invertible part relocates and normalizes a
/// dominant determinant monomial to the diagonal, and a lower then an upper
/// unitriangular add-multiple supply the off-diagonal part. Nonsingular
/// input factors exactly; a tied (tropically singular) input factors up to
/// ghosts on the diagonal, which the tropical projection removes.
pub fn factor_2x2(a: &Matrix, mode: Mode) -> Result<Factorization> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.dim(),
        });
    }
    let a = match mode {
        Mode::Supertropical => a.clone(),
        Mode::Tropical => a.project(),
    };
    let nf = normal_form(&a, mode)?;
    let mut factors = nf.p.factors.clone();
    emit_add_multiple(&mut factors, 2, 2, 1, nf.abar.get(2, 1))?;
    emit_add_multiple(&mut factors, 2, 1, 2, nf.abar.get(1, 2))?;
    let mode = match mode {
        Mode::Supertropical => VerifyMode::ExactSupertropical,
        Mode::Tropical => VerifyMode::ExactTropical,
    };
    let factorization = Factorization {
        factors,
        target: a,
        mode,
    };
    debug_assert!(factorization.verify()?);
    Ok(factorization)
}

/// The entry conditions of a 3x3 normal form.
pub fn entry_conditions(abar: &Matrix) -> Result<EntryConditions> {
    if abar.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: abar.dim(),
        });
    }
    if !abar.is_normal_form() {
        return Err(Error::NotNormalForm);
    }
    let mut values = Matrix::identity(3);
    let mut relations: [[Option<Relation>; 3]; 3] = Default::default();
    for (i, row) in relations.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            let k = 3 - i - j;
            let two_step = abar.at(i, k) * abar.at(k, j);
            *values.at_mut(i, j) = abar.at(i, j) + &two_step;
            *slot = Some(match abar.at(i, j).nu_cmp(&two_step) {
                std::cmp::Ordering::Less => Relation::Less,
                std::cmp::Ordering::Equal => Relation::Equal,
                std::cmp::Ordering::Greater => Relation::Greater,
            });
        }
    }
    Ok(EntryConditions { values, relations })
}

/// The two nondiagonal 3-cycles as (position list, permutation).
fn nondiagonal_cycles() -> [(Vec<(usize, usize)>, Permutation); 2] {
    [
        (
            vec![(0, 1), (1, 2), (2, 0)],
            Permutation::from_images(vec![1, 2, 0]),
        ),
        (
            vec![(0, 2), (2, 1), (1, 0)],
            Permutation::from_images(vec![2, 0, 1]),
        ),
    ]
}

/// Decides 3x3 factorizability of a normal form. `None` means factorizable;
/// otherwise the returned witness names the nondiagonal cycle all of whose
/// entry conditions are strict `<`.
pub fn is_factorizable_3x3(abar: &Matrix) -> Result<Option<NonFactorizabilityWitness>> {
    let conditions = entry_conditions(abar)?;
    for (positions, cycle) in nondiagonal_cycles() {
        if positions
            .iter()
            .all(|&(i, j)| conditions.relation(i + 1, j + 1) == Relation::Less)
        {
            return Ok(Some(NonFactorizabilityWitness::AllLessTrack { cycle }));
        }
    }
    Ok(None)
}

/// Builds the add-multiple stages that rebuild a 3x3 normal form from the
/// identity, recovering row `row` (zero-based) last. Returns `None` when the
/// row's entry conditions do not both hold.
fn row_candidate_factors(
    abar: &Matrix,
    conditions: &EntryConditions,
    row: usize,
) -> Result<Option<Vec<ElementaryMatrix>>> {
    let others: Vec<usize> = (0..3).filter(|&x| x != row).collect();
    let (lo, hi) = (others[0], others[1]);
    let rel = |j: usize| conditions.relation(row + 1, j + 1);
    if rel(lo) == Relation::Less || rel(hi) == Relation::Less {
        return Ok(None);
    }
    let mut factors = Vec::new();
    // Row stage, sources in decreasing index. A `=` condition is normally
    // skipped: the other operation spills exactly the tied value into the
    // position. A ghost entry under `=` is instead emitted once as its
    // tangible value, which the spill then ghosts. If both conditions tie on
    // tangibles, one operation must still run; the higher source is kept.
    let both_equal = rel(lo) == Relation::Equal && rel(hi) == Relation::Equal;
    for &j in &[hi, lo] {
        let entry = abar.at(row, j);
        let emit = match rel(j) {
            Relation::Greater => true,
            Relation::Equal => entry.is_ghost() || (both_equal && j == hi && !entry.is_neg_inf()),
            Relation::Less => unreachable!("screened above"),
        };
        if !emit {
            continue;
        }
        if rel(j) == Relation::Equal {
            factors.push(ElementaryMatrix::add_multiple(
                3,
                row + 1,
                j + 1,
                entry.project(),
            )?);
        } else {
            emit_add_multiple(&mut factors, 3, row + 1, j + 1, entry)?;
        }
    }
    // Column stage: fill column `row` top-down from its identity row.
    for &t in &[hi, lo] {
        emit_add_multiple(&mut factors, 3, t + 1, row + 1, abar.at(t, row))?;
    }
    // The 2x2 minor on the remaining indices.
    emit_add_multiple(&mut factors, 3, lo + 1, hi + 1, abar.at(lo, hi))?;
    emit_add_multiple(&mut factors, 3, hi + 1, lo + 1, abar.at(hi, lo))?;
    Ok(Some(factors))
}

/// Decides and constructs a 3x3 factorization.
///
/// The normal form is computed, its entry conditions checked, and the matrix
/// rebuilt from the identity: a 2x2 minor, then the third column, then the
/// remaining row, whose both conditions must dominate. Nonsingular inputs
/// verify exactly; rare ghost placements that tie a condition verify up to
/// value equality and the result is downgraded to [`VerifyMode::NuEquivalent`].
/// Tropical inputs verify after projection.
pub fn factor_3x3(a: &Matrix, mode: Mode) -> Result<Factorization> {
    if a.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: a.dim(),
        });
    }
    let a = match mode {
        Mode::Supertropical => a.clone(),
        Mode::Tropical => a.project(),
    };
    let nf = normal_form(&a, mode)?;
    let conditions = entry_conditions(&nf.abar)?;
    if let Some(witness) = is_factorizable_3x3(&nf.abar)? {
        return Err(Error::NotFactorizable(witness));
    }
    // Try every qualifying row; prefer an exact rebuild, then the largest
    // row index. A qualifying row always rebuilds at least the values.
    let mut exact_pick = None;
    let mut nu_pick = None;
    for row in 0..3 {
        let Some(candidate) = row_candidate_factors(&nf.abar, &conditions, row)? else {
            continue;
        };
        let product = eval_factors(3, &candidate)?;
        if product == nf.abar {
            exact_pick = Some(candidate);
        } else if product.nu_eq(&nf.abar)? {
            nu_pick = Some(candidate);
        }
    }
    let (chosen, exact) = match (exact_pick, nu_pick) {
        (Some(c), _) => (c, true),
        (None, Some(c)) => (c, false),
        (None, None) => unreachable!("a qualifying row always rebuilds the values"),
    };
    let mut factors = nf.p.factors.clone();
    factors.extend(chosen);
    let mode = match mode {
        Mode::Supertropical if exact => VerifyMode::ExactSupertropical,
        Mode::Supertropical => VerifyMode::NuEquivalent,
        Mode::Tropical => VerifyMode::ExactTropical,
    };
    let factorization = Factorization {
        factors,
        target: a,
        mode,
    };
    debug_assert!(factorization.verify()?);
    Ok(factorization)
}

/// Looks for the shift-permutation obstruction: a finite support that is
/// exactly two disjoint permutation tracks, one a cyclic shift of the other
/// by `t` outside `{0, n/2}`. Such a matrix is not factorizable: the last
/// add-multiple that could finish one track necessarily raises a zero entry
/// beyond repair. Returns `None` for `n <= 2`.
pub fn detect_shift_counterexample(a: &Matrix) -> Option<NonFactorizabilityWitness> {
    let n = a.dim();
    if n <= 2 {
        return None;
    }
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut col_count = vec![0usize; n];
    for i in 0..n {
        let finite: Vec<usize> = (0..n).filter(|&j| !a.at(i, j).is_neg_inf()).collect();
        if finite.len() != 2 {
            return None;
        }
        for &j in &finite {
            col_count[j] += 1;
        }
        rows.push(finite);
    }
    if col_count.iter().any(|&c| c != 2) {
        return None;
    }
    let (x0, y0) = (rows[0][0], rows[0][1]);
    let mut shifts = vec![(y0 + n - x0) % n, (x0 + n - y0) % n];
    shifts.dedup();
    'shifts: for &t in &shifts {
        if t == 0 || (n.is_multiple_of(2) && t == n / 2) {
            continue;
        }
        let mut sigma = vec![usize::MAX; n];
        let mut pi = vec![usize::MAX; n];
        for i in 0..n {
            let (x, y) = (rows[i][0], rows[i][1]);
            if (x + t) % n == y {
                sigma[i] = x;
                pi[i] = y;
            } else if (y + t) % n == x {
                sigma[i] = y;
                pi[i] = x;
            } else {
                continue 'shifts;
            }
        }
        let bijective = |imgs: &[usize]| {
            let mut seen = vec![false; n];
            imgs.iter()
                .all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
        };
        if bijective(&sigma) && bijective(&pi) {
            return Some(NonFactorizabilityWitness::ShiftPermutationPair {
                sigma: Permutation::from_images(sigma),
                pi: Permutation::from_images(pi),
                shift: t,
            });
        }
    }
    None
}

/// Checks the growth conditions for recovering row `row` (one-based) of a
/// normal form: the row entry must dominate every two-step detour through the
/// other rows. Strict domination (or ghost entries at ties) keeps the
/// recovery exact over the semiring; tangible ties only survive projection.
pub fn row_recovery_check(abar: &Matrix, row: usize) -> Result<RowRecovery> {
    if !abar.is_normal_form() {
        return Err(Error::NotNormalForm);
    }
    let n = abar.dim();
    assert!(row >= 1 && row <= n, "row out of range");
    let i = row - 1;
    let mut tangible_tie = false;
    for j in (0..n).filter(|&j| j != i) {
        for k in (0..n).filter(|&k| k != i && k != j) {
            let detour = abar.at(i, k) * abar.at(k, j);
            match abar.at(i, j).nu_cmp(&detour) {
                std::cmp::Ordering::Less => return Ok(RowRecovery::Fails),
                std::cmp::Ordering::Equal => {
                    if !abar.at(i, j).is_ghost() {
                        tangible_tie = true;
                    }
                }
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    Ok(if tangible_tie {
        RowRecovery::TropicalOnly
    } else {
        RowRecovery::Supertropical
    })
}

/// Factors the quasi-inverse of any not strictly singular matrix
/// (nonsingular, under supertropical semantics).
///
/// With `A = P * Abar`, the quasi-inverse of `Abar` satisfies the growth
/// conditions everywhere, so it can be rebuilt from the identity one leading
/// minor at a time: the 2x2 minor, then for each next index its column
/// (drawn from a still-identity row) and its row (drawn from the finished
/// minor). The inverse of `P` is appended so the product reaches the
/// quasi-inverse of `A` itself. Verification is tropical: ties may leave
/// ghosts where the quasi-inverse is tangible, and value equality over the
/// semiring holds throughout.
pub fn factor_star(a: &Matrix, mode: Mode) -> Result<StarFactorization> {
    let a = match mode {
        Mode::Supertropical => a.clone(),
        Mode::Tropical => a.project(),
    };
    let nf = normal_form(&a, mode)?;
    let b = nf.abar.quasi_inverse(mode)?;
    let n = a.dim();
    let mut factors = Vec::new();
    let mut minor_prefixes = Vec::new();
    if n >= 2 {
        emit_add_multiple(&mut factors, n, 2, 1, b.get(2, 1))?;
        emit_add_multiple(&mut factors, n, 1, 2, b.get(1, 2))?;
        minor_prefixes.push((2, factors.len()));
        for m in 3..=n {
            for target in (1..m).rev() {
                emit_add_multiple(&mut factors, n, target, m, b.get(target, m))?;
            }
            for source in (1..m).rev() {
                emit_add_multiple(&mut factors, n, m, source, b.get(m, source))?;
            }
            minor_prefixes.push((m, factors.len()));
        }
    }
    let p_matrix = &nf.p.target;
    factors.extend(factor_invertible(&invert_monomial(p_matrix)?)?.factors);
    let target = a.quasi_inverse(mode)?;
    let factorization = Factorization {
        factors,
        target,
        mode: VerifyMode::ExactTropical,
    };
    debug_assert!(factorization.verify()?);
    Ok(StarFactorization {
        factorization,
        minor_prefixes,
        star_of_normal_form: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: i64) -> Scalar {
        Scalar::int(v)
    }

    fn g(v: i64) -> Scalar {
        Scalar::ghost_int(v)
    }

    const F: Option<i64> = None;

    fn worked_example() -> Matrix {
        Matrix::from_int_rows(&[
            &[Some(0), Some(-3), Some(0)],
            &[Some(1), Some(5), Some(0)],
            &[Some(3), Some(1), Some(6)],
        ])
    }

    fn worked_normal_form() -> Matrix {
        Matrix::from_int_rows(&[
            &[Some(0), Some(-3), Some(0)],
            &[Some(-4), Some(0), Some(-5)],
            &[Some(-3), Some(-5), Some(0)],
        ])
    }

    fn blocked_example() -> Matrix {
        Matrix::from_int_rows(&[
            &[Some(4), Some(3), Some(3)],
            &[Some(4), Some(5), Some(2)],
            &[Some(5), Some(7), Some(6)],
        ])
    }

    fn scale(i: usize, v: i64) -> ElementaryMatrix {
        ElementaryMatrix::scale(3, i, t(v)).unwrap()
    }

    fn addmul(i: usize, j: usize, v: i64) -> ElementaryMatrix {
        ElementaryMatrix::add_multiple(3, i, j, t(v)).unwrap()
    }

    #[test]
    fn normal_form_of_the_worked_example() {
        let nf = normal_form(&worked_example(), Mode::Supertropical).unwrap();
        assert_eq!(nf.abar, worked_normal_form());
        assert_eq!(nf.p.factors, vec![scale(2, 5), scale(3, 6)]);
        assert!(nf.p.verify().unwrap());
    }

    #[test]
    fn normal_form_of_the_blocked_example() {
        let a = blocked_example();
        assert_eq!(a.determinant(), t(15));
        let nf = normal_form(&a, Mode::Supertropical).unwrap();
        let expected = Matrix::from_int_rows(&[
            &[Some(0), Some(-1), Some(-1)],
            &[Some(-1), Some(0), Some(-3)],
            &[Some(-1), Some(1), Some(0)],
        ]);
        assert_eq!(nf.abar, expected);
        assert_eq!(nf.p.factors, vec![scale(1, 4), scale(2, 5), scale(3, 6)]);
    }

    #[test]
    fn normal_form_of_identity_is_trivial() {
        let nf = normal_form(&Matrix::identity(3), Mode::Supertropical).unwrap();
        assert!(nf.p.factors.is_empty());
        assert_eq!(nf.abar, Matrix::identity(3));
    }

    #[test]
    fn normal_form_rejects_bad_classes() {
        let strictly = Matrix::from_int_rows(&[&[Some(0), F], &[F, F]]);
        assert_eq!(
            normal_form(&strictly, Mode::Tropical).unwrap_err(),
            Error::StrictlySingularInput
        );
        let tie = Matrix::from_int_rows(&[&[Some(0), Some(0)], &[Some(0), Some(0)]]);
        assert_eq!(
            normal_form(&tie, Mode::Supertropical).unwrap_err(),
            Error::NotInvertibleDeterminant
        );
        assert!(normal_form(&tie, Mode::Tropical).is_ok());
    }

    #[test]
    fn factor_invertible_of_a_diagonal() {
        let d = Matrix::from_diagonal(vec![t(0), t(5), t(6)]);
        let f = factor_invertible(&d).unwrap();
        assert_eq!(f.factors, vec![scale(2, 5), scale(3, 6)]);
    }

    #[test]
    fn factor_invertible_of_a_transposition() {
        let p = ElementaryMatrix::swap(3, 1, 2).unwrap().expand();
        let f = factor_invertible(&p).unwrap();
        assert_eq!(f.factors, vec![ElementaryMatrix::swap(3, 1, 2).unwrap()]);
    }

    #[test]
    fn factor_invertible_of_a_general_monomial() {
        // 3-cycle with scaling.
        let mut p = Matrix::from_fn(3, |_, _| Scalar::NegInf);
        *p.at_mut(0, 1) = t(2);
        *p.at_mut(1, 2) = t(-1);
        *p.at_mut(2, 0) = t(4);
        let f = factor_invertible(&p).unwrap();
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_invertible_rejects_wide_rows() {
        let bad = Matrix::from_int_rows(&[&[Some(0), Some(1)], &[F, Some(0)]]);
        assert_eq!(
            factor_invertible(&bad).unwrap_err(),
            Error::NotInvertibleShape
        );
        let ghostly =
            Matrix::from_rows(vec![vec![g(0), Scalar::NegInf], vec![Scalar::NegInf, t(0)]]);
        assert_eq!(
            factor_invertible(&ghostly).unwrap_err(),
            Error::NotInvertibleShape
        );
    }

    #[test]
    fn invert_monomial_inverts() {
        let mut p = Matrix::from_fn(3, |_, _| Scalar::NegInf);
        *p.at_mut(0, 1) = t(2);
        *p.at_mut(1, 2) = t(-1);
        *p.at_mut(2, 0) = t(4);
        let inv = invert_monomial(&p).unwrap();
        assert_eq!(p.mul(&inv).unwrap(), Matrix::identity(3));
        assert_eq!(inv.mul(&p).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn factor_triangular_single_off_diagonal() {
        let a = Matrix::from_int_rows(&[&[Some(0), Some(-3)], &[F, Some(0)]]);
        let f = factor_triangular(&a).unwrap();
        assert_eq!(
            f.factors,
            vec![ElementaryMatrix::add_multiple(2, 1, 2, t(-3)).unwrap()]
        );
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_triangular_scales_then_rebuilds() {
        let a = Matrix::from_int_rows(&[&[Some(2), Some(5)], &[F, Some(3)]]);
        let f = factor_triangular(&a).unwrap();
        assert_eq!(
            f.factors,
            vec![
                ElementaryMatrix::scale(2, 1, t(2)).unwrap(),
                ElementaryMatrix::scale(2, 2, t(3)).unwrap(),
                ElementaryMatrix::add_multiple(2, 1, 2, t(3)).unwrap(),
            ]
        );
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_triangular_of_identity_is_empty() {
        let f = factor_triangular(&Matrix::identity(4)).unwrap();
        assert!(f.factors.is_empty());
    }

    #[test]
    fn factor_triangular_handles_lower_and_larger() {
        let a = Matrix::from_int_rows(&[
            &[Some(1), F, F],
            &[Some(4), Some(-2), F],
            &[Some(0), Some(7), Some(3)],
        ]);
        let f = factor_triangular(&a).unwrap();
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_triangular_with_ghost_off_diagonal_is_exact() {
        let a = Matrix::from_rows(vec![vec![t(0), g(-3)], vec![Scalar::NegInf, t(0)]]);
        let f = factor_triangular(&a).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_triangular_rejections() {
        let a = worked_example();
        assert_eq!(factor_triangular(&a).unwrap_err(), Error::NotTriangular);
        let ghost_diag = Matrix::from_rows(vec![vec![g(0), t(1)], vec![Scalar::NegInf, t(0)]]);
        assert_eq!(
            factor_triangular(&ghost_diag).unwrap_err(),
            Error::NonTangibleDiagonal { row: 1 }
        );
    }

    #[test]
    fn factor_2x2_when_the_diagonal_dominates() {
        let a = Matrix::from_int_rows(&[&[Some(0), Some(-3)], &[Some(-4), Some(0)]]);
        let f = factor_2x2(&a, Mode::Supertropical).unwrap();
        assert_eq!(
            f.factors,
            vec![
                ElementaryMatrix::add_multiple(2, 2, 1, t(-4)).unwrap(),
                ElementaryMatrix::add_multiple(2, 1, 2, t(-3)).unwrap(),
            ]
        );
        assert_eq!(f.mode, VerifyMode::ExactSupertropical);
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_2x2_relocates_a_dominant_antidiagonal() {
        let a = Matrix::from_int_rows(&[&[Some(-3), Some(0)], &[Some(0), Some(-4)]]);
        let f = factor_2x2(&a, Mode::Supertropical).unwrap();
        assert_eq!(f.factors[0], ElementaryMatrix::swap(2, 1, 2).unwrap());
        assert!(f.verify().unwrap());
        assert_eq!(f.eval().unwrap(), a);
    }

    #[test]
    fn factor_2x2_handles_a_tropical_tie() {
        let a = Matrix::from_int_rows(&[&[Some(0), Some(0)], &[Some(0), Some(0)]]);
        let f = factor_2x2(&a, Mode::Tropical).unwrap();
        assert_eq!(f.mode, VerifyMode::ExactTropical);
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_2x2_rejects_strictly_singular() {
        let a = Matrix::from_int_rows(&[&[F, F], &[F, F]]);
        assert_eq!(
            factor_2x2(&a, Mode::Tropical).unwrap_err(),
            Error::StrictlySingularInput
        );
    }

    #[test]
    fn entry_conditions_of_the_worked_normal_form() {
        let conditions = entry_conditions(&worked_normal_form()).unwrap();
        assert_eq!(conditions.relation(1, 2), Relation::Greater);
        assert_eq!(conditions.relation(1, 3), Relation::Greater);
        assert_eq!(conditions.relation(2, 1), Relation::Greater);
        assert_eq!(conditions.relation(2, 3), Relation::Less);
        assert_eq!(conditions.relation(3, 1), Relation::Greater);
        assert_eq!(conditions.relation(3, 2), Relation::Greater);
        assert_eq!(conditions.render_relations(), ". > >\n> . <\n> > .\n");
        // The condition values are the quasi-inverse.
        assert_eq!(
            conditions.values,
            worked_normal_form()
                .quasi_inverse(Mode::Supertropical)
                .unwrap()
        );
    }

    #[test]
    fn entry_conditions_of_identity_are_all_ties() {
        let conditions = entry_conditions(&Matrix::identity(3)).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                if i != j {
                    assert_eq!(conditions.relation(i, j), Relation::Equal);
                }
            }
        }
    }

    #[test]
    fn entry_conditions_require_a_normal_form() {
        assert_eq!(
            entry_conditions(&worked_example()).unwrap_err(),
            Error::NotNormalForm
        );
    }

    #[test]
    fn factorizability_of_the_two_worked_normal_forms() {
        assert_eq!(is_factorizable_3x3(&worked_normal_form()).unwrap(), None);
        let blocked_nf = normal_form(&blocked_example(), Mode::Supertropical)
            .unwrap()
            .abar;
        let witness = is_factorizable_3x3(&blocked_nf).unwrap().unwrap();
        assert_eq!(
            witness,
            NonFactorizabilityWitness::AllLessTrack {
                cycle: Permutation::from_images(vec![1, 2, 0]),
            }
        );
        assert_eq!(witness.to_string(), "all-less-track: 1->2->3->1");
    }

    #[test]
    fn shift_family_instance_is_blocked_on_the_other_cycle() {
        let a = Matrix::from_int_rows(&[
            &[Some(0), Some(-2), F],
            &[F, Some(0), Some(-5)],
            &[Some(-7), F, Some(0)],
        ]);
        let witness = is_factorizable_3x3(&a).unwrap().unwrap();
        assert_eq!(
            witness,
            NonFactorizabilityWitness::AllLessTrack {
                cycle: Permutation::from_images(vec![2, 0, 1]),
            }
        );
        assert_eq!(witness.to_string(), "all-less-track: 1->3->2->1");
    }

    #[test]
    fn factor_3x3_reproduces_the_worked_product() {
        let f = factor_3x3(&worked_example(), Mode::Supertropical).unwrap();
        assert_eq!(
            f.factors,
            vec![
                scale(2, 5),
                scale(3, 6),
                addmul(3, 2, -5),
                addmul(3, 1, -3),
                addmul(2, 3, -5),
                addmul(1, 3, 0),
                addmul(1, 2, -3),
                addmul(2, 1, -4),
            ]
        );
        assert_eq!(f.mode, VerifyMode::ExactSupertropical);
        assert!(f.verify().unwrap());
        assert_eq!(f.eval().unwrap(), worked_example());
    }

    #[test]
    fn factor_3x3_rejects_the_blocked_example_with_a_witness() {
        let err = factor_3x3(&blocked_example(), Mode::Supertropical).unwrap_err();
        let Error::NotFactorizable(NonFactorizabilityWitness::AllLessTrack { cycle }) = err else {
            panic!("expected an all-less-track witness, got {err:?}");
        };
        assert_eq!(cycle, Permutation::from_images(vec![1, 2, 0]));
    }

    #[test]
    fn factor_3x3_of_identity_has_no_add_multiples() {
        let f = factor_3x3(&Matrix::identity(3), Mode::Supertropical).unwrap();
        assert!(f.factors.is_empty());
        assert!(f.verify().unwrap());
    }

    #[test]
    fn factor_3x3_prefers_an_exact_row_over_a_ghost_tie() {
        // Row 3 has an exact tie between a tangible entry and a ghost detour;
        // rows 1 and 2 also qualify and rebuild exactly, so this stays exact.
        let a = Matrix::from_rows(vec![
            vec![t(0), t(-5), t(-5)],
            vec![t(-1), t(0), t(-5)],
            vec![t(-2), g(-1), t(0)],
        ]);
        assert_eq!(a.classify(), SingularityClass::NonSingular);
        let f = factor_3x3(&a, Mode::Supertropical).unwrap();
        assert!(f.verify().unwrap());
        assert_eq!(f.mode, VerifyMode::ExactSupertropical);
    }

    #[test]
    fn factor_3x3_downgrades_when_only_a_ghost_tied_row_qualifies() {
        // Relations: (1,2) and (2,3) are `<`, so rows 1 and 2 do not qualify;
        // row 3 ties a tangible entry against a ghost detour, so the rebuild
        // can only match values, not ghosting.
        let a = Matrix::from_rows(vec![
            vec![t(0), t(-4), t(-1)],
            vec![t(-1), t(0), t(-5)],
            vec![t(-2), g(-1), t(0)],
        ]);
        assert_eq!(a.classify(), SingularityClass::NonSingular);
        let f = factor_3x3(&a, Mode::Supertropical).unwrap();
        assert_eq!(f.mode, VerifyMode::NuEquivalent);
        assert!(f.verify().unwrap());
        assert!(f.eval().unwrap() != a);
    }

    #[test]
    fn factor_3x3_handles_an_all_ties_singular_matrix_tropically() {
        // Every entry condition is `=`; tropically singular but factorizable.
        let a = Matrix::from_fn(3, |_, _| t(0));
        assert_eq!(a.classify(), SingularityClass::Singular);
        let f = factor_3x3(&a, Mode::Tropical).unwrap();
        assert_eq!(f.mode, VerifyMode::ExactTropical);
        assert!(f.verify().unwrap());
        assert!(factor_3x3(&a, Mode::Supertropical).is_err());
    }

    #[test]
    fn detect_shift_finds_the_three_cycle_pair() {
        let a = Matrix::from_int_rows(&[
            &[Some(0), Some(-2), F],
            &[F, Some(0), Some(-5)],
            &[Some(-7), F, Some(0)],
        ]);
        let witness = detect_shift_counterexample(&a).unwrap();
        assert_eq!(
            witness,
            NonFactorizabilityWitness::ShiftPermutationPair {
                sigma: Permutation::identity(3),
                pi: Permutation::from_images(vec![1, 2, 0]),
                shift: 1,
            }
        );
    }

    #[test]
    fn detect_shift_ignores_single_tracks_and_half_shifts() {
        assert_eq!(detect_shift_counterexample(&Matrix::identity(3)), None);
        // n = 4, both tracks present but the shift is n/2.
        let mut m = Matrix::from_fn(4, |_, _| Scalar::NegInf);
        for i in 0..4 {
            *m.at_mut(i, i) = t(0);
            *m.at_mut(i, (i + 2) % 4) = t(-1);
        }
        assert_eq!(detect_shift_counterexample(&m), None);
    }

    #[test]
    fn detect_shift_finds_an_odd_shift_of_a_nonidentity_track() {
        // sigma a transposition-bearing permutation, pi its shift by 2, n = 5.
        let sigma = Permutation::from_images(vec![1, 0, 3, 2, 4]);
        let mut m = Matrix::from_fn(5, |_, _| Scalar::NegInf);
        for i in 0..5 {
            *m.at_mut(i, sigma.apply(i)) = t(0);
            *m.at_mut(i, (sigma.apply(i) + 2) % 5) = t(-3);
        }
        let witness = detect_shift_counterexample(&m).unwrap();
        let NonFactorizabilityWitness::ShiftPermutationPair {
            sigma: s,
            pi: p,
            shift,
        } = witness
        else {
            panic!("expected a shift pair");
        };
        assert_eq!(shift, 2);
        for i in 0..5 {
            assert_eq!((s.apply(i) + 2) % 5, p.apply(i));
        }
    }

    #[test]
    fn row_recovery_of_the_worked_normal_form() {
        assert_eq!(
            row_recovery_check(&worked_normal_form(), 3).unwrap(),
            RowRecovery::Supertropical
        );
        let blocked_nf = normal_form(&blocked_example(), Mode::Supertropical)
            .unwrap()
            .abar;
        assert_eq!(
            row_recovery_check(&blocked_nf, 1).unwrap(),
            RowRecovery::Fails
        );
        assert_eq!(
            row_recovery_check(&Matrix::identity(3), 2).unwrap(),
            RowRecovery::TropicalOnly
        );
        assert_eq!(
            row_recovery_check(&worked_example(), 1).unwrap_err(),
            Error::NotNormalForm
        );
    }

    #[test]
    fn factor_star_of_the_worked_normal_form() {
        let star = factor_star(&worked_normal_form(), Mode::Supertropical).unwrap();
        let expected = Matrix::from_int_rows(&[
            &[Some(0), Some(-3), Some(0)],
            &[Some(-4), Some(0), Some(-4)],
            &[Some(-3), Some(-5), Some(0)],
        ]);
        assert_eq!(star.star_of_normal_form, expected);
        assert!(star.factorization.verify().unwrap());
        assert_eq!(
            star.factorization.eval().unwrap().project(),
            expected.project()
        );
    }

    #[test]
    fn factor_star_of_identity_is_empty() {
        let star = factor_star(&Matrix::identity(3), Mode::Supertropical).unwrap();
        assert!(star.factorization.factors.is_empty());
        assert_eq!(star.factorization.target, Matrix::identity(3));
    }

    #[test]
    fn factor_star_of_the_blocked_example_still_works() {
        let star = factor_star(&blocked_example(), Mode::Supertropical).unwrap();
        assert!(star.factorization.verify().unwrap());
        assert!(star
            .factorization
            .eval()
            .unwrap()
            .nu_eq(&star.factorization.target)
            .unwrap());
    }

    #[test]
    fn factor_star_of_a_one_by_one() {
        let a = Matrix::from_int_rows(&[&[Some(7)]]);
        let star = factor_star(&a, Mode::Supertropical).unwrap();
        assert_eq!(
            star.factorization.target,
            Matrix::from_int_rows(&[&[Some(-7)]])
        );
        assert!(star.factorization.verify().unwrap());
    }

    #[test]
    fn factor_triangular_round_trips_on_random_inputs() {
        use crate::harness::{gen_matrix, GeneratorConfig, Rng};
        for trial in 0..40 {
            let n = (trial % 5 + 1) as usize;
            let cfg = GeneratorConfig::new(n, 0x7121);
            let mut rng = Rng::for_trial(cfg.seed, trial);
            let raw = gen_matrix(&cfg, &mut rng);
            let upper = trial % 2 == 0;
            let tri = Matrix::from_fn(n, |i, j| {
                if i == j {
                    // Diagonal must be tangible.
                    match raw.at(i, j).value() {
                        Some(v) => Scalar::Tangible(v.clone()),
                        None => Scalar::one(),
                    }
                } else if (upper && j > i) || (!upper && j < i) {
                    raw.at(i, j).clone()
                } else {
                    Scalar::NegInf
                }
            });
            let f = factor_triangular(&tri).unwrap();
            assert!(f.verify().unwrap(), "trial {trial} failed on {tri}");
        }
    }

    #[test]
    fn factor_star_minor_prefixes_grow_the_quasi_inverse() {
        let star = factor_star(&worked_normal_form(), Mode::Supertropical).unwrap();
        assert_eq!(
            star.minor_prefixes
                .iter()
                .map(|&(m, _)| m)
                .collect::<Vec<_>>(),
            vec![2, 3]
        );
        let b = &star.star_of_normal_form;
        for &(m, len) in &star.minor_prefixes {
            let partial = eval_factors(3, &star.factorization.factors[..len]).unwrap();
            for i in 1..=3 {
                for j in 1..=3 {
                    if i <= m && j <= m {
                        assert!(
                            partial.get(i, j).project() == b.get(i, j).project(),
                            "minor {m} disagrees at ({i}, {j})"
                        );
                    } else {
                        let expected = if i == j {
                            Scalar::one()
                        } else {
                            Scalar::NegInf
                        };
                        assert_eq!(partial.get(i, j), &expected);
                    }
                }
            }
        }
    }
}
