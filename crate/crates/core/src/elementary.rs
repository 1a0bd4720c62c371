//! Elementary matrices, ordered factor lists, and the rewrite that pushes
//! add-multiple factors to the left end of a product.
//!
//! The three kinds mirror the elementary row operations: swapping two rows,
//! scaling a row by a tangible, and adding a tangible multiple of one row to
//! another. Swaps and scales generate exactly the invertible matrices;
//! add-multiples are where singularity can enter a product. Coefficients are
//! restricted to tangibles: a ghost coefficient is the same as applying the
//! tangible one twice, so nothing is lost.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// One elementary row operation; all row indices are one-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementaryOp {
    /// Swap rows `i` and `j`.
    Swap { i: usize, j: usize },
    /// Scale row `i` by the tangible `k`.
    Scale { i: usize, k: Scalar },
    /// Add `k` times row `source` to row `target`, `k` tangible.
    AddMultiple {
        target: usize,
        source: usize,
        k: Scalar,
    },
}

/// An elementary operation together with the dimension it acts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryMatrix {
    dim: usize,
    op: ElementaryOp,
}

impl ElementaryMatrix {
    pub fn swap(dim: usize, i: usize, j: usize) -> Result<Self> {
        check_row(dim, i)?;
        check_row(dim, j)?;
        if i == j {
            return Err(Error::Parse(format!(
                "swap rows must differ, got {i} and {j}"
            )));
        }
        Ok(ElementaryMatrix {
            dim,
            op: ElementaryOp::Swap { i, j },
        })
    }

    pub fn scale(dim: usize, i: usize, k: Scalar) -> Result<Self> {
        check_row(dim, i)?;
        if !k.is_tangible() {
            return Err(Error::NonTangibleCoefficient);
        }
        Ok(ElementaryMatrix {
            dim,
            op: ElementaryOp::Scale { i, k },
        })
    }

    pub fn add_multiple(dim: usize, target: usize, source: usize, k: Scalar) -> Result<Self> {
        check_row(dim, target)?;
        check_row(dim, source)?;
        if target == source {
            return Err(Error::Parse(format!(
                "add-multiple target and source must differ, got {target}"
            )));
        }
        if !k.is_tangible() {
            return Err(Error::NonTangibleCoefficient);
        }
        Ok(ElementaryMatrix {
            dim,
            op: ElementaryOp::AddMultiple { target, source, k },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn op(&self) -> &ElementaryOp {
        &self.op
    }

    pub fn is_add_multiple(&self) -> bool {
        matches!(self.op, ElementaryOp::AddMultiple { .. })
    }

    /// The matrix obtained by applying the operation to the identity.
    pub fn expand(&self) -> Matrix {
        let mut m = Matrix::identity(self.dim);
        match &self.op {
            ElementaryOp::Swap { i, j } => {
                let (i, j) = (i - 1, j - 1);
                *m.at_mut(i, i) = Scalar::NegInf;
                *m.at_mut(j, j) = Scalar::NegInf;
                *m.at_mut(i, j) = Scalar::one();
                *m.at_mut(j, i) = Scalar::one();
            }
            ElementaryOp::Scale { i, k } => {
                *m.at_mut(i - 1, i - 1) = k.clone();
            }
            ElementaryOp::AddMultiple { target, source, k } => {
                *m.at_mut(target - 1, source - 1) = k.clone();
            }
        }
        m
    }
}

impl fmt::Display for ElementaryMatrix {
    /// One factor line of the factorization file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.op {
            ElementaryOp::Swap { i, j } => write!(f, "swap {i} {j}"),
            ElementaryOp::Scale { i, k } => write!(f, "scale {i} {k}"),
            ElementaryOp::AddMultiple { target, source, k } => {
                write!(f, "addmul {target} {source} {k}")
            }
        }
    }
}

fn check_row(dim: usize, i: usize) -> Result<()> {
    if i == 0 || i > dim {
        return Err(Error::Parse(format!(
            "row index {i} out of range 1..={dim}"
        )));
    }
    Ok(())
}

/// Left-to-right product of expanded factors; the empty list is the identity.
pub fn eval_factors(dim: usize, factors: &[ElementaryMatrix]) -> Result<Matrix> {
    let mut acc = Matrix::identity(dim);
    for factor in factors {
        if factor.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: factor.dim(),
            });
        }
        acc = acc.mul(&factor.expand())?;
    }
    Ok(acc)
}

/// How a factorization claims to match its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Entrywise equality over the supertropical semiring.
    ExactSupertropical,
    /// Entrywise value equality, blind to ghosting.
    NuEquivalent,
    /// Equality of the tropical projections.
    ExactTropical,
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyMode::ExactSupertropical => write!(f, "exact"),
            VerifyMode::NuEquivalent => write!(f, "nu"),
            VerifyMode::ExactTropical => write!(f, "trop"),
        }
    }
}

impl VerifyMode {
    pub fn parse_token(tok: &str) -> Result<Self> {
        match tok {
            "exact" => Ok(VerifyMode::ExactSupertropical),
            "nu" => Ok(VerifyMode::NuEquivalent),
            "trop" => Ok(VerifyMode::ExactTropical),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// An ordered product of elementary matrices, the matrix it claims to equal,
/// and the sense in which it claims equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<ElementaryMatrix>,
    pub target: Matrix,
    pub mode: VerifyMode,
}

impl Factorization {
    pub fn eval(&self) -> Result<Matrix> {
        eval_factors(self.target.dim(), &self.factors)
    }

    /// Checks the claimed relation between the evaluated product and the
    /// target under the declared mode.
    pub fn verify(&self) -> Result<bool> {
        let product = self.eval()?;
        Ok(match self.mode {
            VerifyMode::ExactSupertropical => product == self.target,
            VerifyMode::NuEquivalent => product.nu_eq(&self.target)?,
            VerifyMode::ExactTropical => product.project() == self.target.project(),
        })
    }
}

/// Rewrites the list into one with an identical product in which every
/// add-multiple precedes every swap and scale.
///
/// The rewrite swaps one adjacent pair at a time: a swap conjugates the
/// add-multiple's indices, a scale of the targeted row multiplies the
/// coefficient, and a scale of the source row divides it.
pub fn push_type3_left(factors: &[ElementaryMatrix]) -> Result<Vec<ElementaryMatrix>> {
    let Some(first) = factors.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    let mut adds: Vec<ElementaryMatrix> = Vec::new();
    let mut rest: Vec<ElementaryMatrix> = Vec::new();
    for factor in factors {
        if factor.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: factor.dim(),
            });
        }
        if factor.is_add_multiple() {
            let mut moving = factor.clone();
            for fixed in rest.iter().rev() {
                moving = push_through(fixed, moving)?;
            }
            adds.push(moving);
        } else {
            rest.push(factor.clone());
        }
    }
    adds.extend(rest);
    Ok(adds)
}

/// For `fixed` of swap/scale kind and `moving` an add-multiple, returns the
/// add-multiple `m` with `fixed * moving = m * fixed`.
fn push_through(fixed: &ElementaryMatrix, moving: ElementaryMatrix) -> Result<ElementaryMatrix> {
    let dim = moving.dim();
    let ElementaryOp::AddMultiple { target, source, k } = moving.op else {
        unreachable!("moving factor is always an add-multiple");
    };
    match &fixed.op {
        ElementaryOp::Swap { i, j } => {
            let relabel = |r: usize| {
                if r == *i {
                    *j
                } else if r == *j {
                    *i
                } else {
                    r
                }
            };
            ElementaryMatrix::add_multiple(dim, relabel(target), relabel(source), k)
        }
        ElementaryOp::Scale { i, k: h } => {
            if target == *i {
                ElementaryMatrix::add_multiple(dim, target, source, &k * h)
            } else if source == *i {
                ElementaryMatrix::add_multiple(dim, target, source, &k * &h.inv()?)
            } else {
                ElementaryMatrix::add_multiple(dim, target, source, k)
            }
        }
        ElementaryOp::AddMultiple { .. } => unreachable!("fixed factor is never an add-multiple"),
    }
}

/// Renders the factorization file format: a `n <dim>` header, one factor per
/// line in left-to-right product order, the target matrix inline, and the
/// verification mode.
pub fn render_factorization(f: &Factorization) -> String {
    let mut out = String::new();
    out.push_str(&format!("n {}\n", f.target.dim()));
    for factor in &f.factors {
        out.push_str(&factor.to_string());
        out.push('\n');
    }
    out.push_str("target inline\n");
    out.push_str(&f.target.to_string());
    out.push_str(&format!("mode {}\n", f.mode));
    out
}

/// Parses the factorization file format. The target is either `inline`,
/// followed by a matrix block, or `file <path>`, in which case `resolve` is
/// asked for the matrix.
pub fn parse_factorization(
    input: &str,
    mut resolve: impl FnMut(&str) -> Result<Matrix>,
) -> Result<Factorization> {
    let lines: Vec<&str> = input
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Result<&str> {
        let line = lines
            .get(*pos)
            .copied()
            .ok_or_else(|| Error::Parse("unexpected end of factorization file".into()))?;
        *pos += 1;
        Ok(line)
    };

    let header: Vec<&str> = next_line(&mut pos)?.split_whitespace().collect();
    let dim: usize = match header.as_slice() {
        ["n", d] => d
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?,
        _ => return Err(Error::Parse("expected header `n <dim>`".into())),
    };

    let mut factors = Vec::new();
    let target: Matrix = loop {
        let line = next_line(&mut pos)?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["swap", i, j] => {
                factors.push(ElementaryMatrix::swap(dim, parse_row(i)?, parse_row(j)?)?);
            }
            ["scale", i, k] => {
                factors.push(ElementaryMatrix::scale(dim, parse_row(i)?, k.parse()?)?);
            }
            ["addmul", i, j, k] => {
                factors.push(ElementaryMatrix::add_multiple(
                    dim,
                    parse_row(i)?,
                    parse_row(j)?,
                    k.parse()?,
                )?);
            }
            ["target", "inline"] => {
                let mut block = String::new();
                while pos < lines.len() && !lines[pos].starts_with("mode") {
                    block.push_str(lines[pos]);
                    block.push('\n');
                    pos += 1;
                }
                break block.parse()?;
            }
            ["target", "file", path] => break resolve(path)?,
            _ => return Err(Error::Parse(format!("unrecognized line `{line}`"))),
        }
    };
    if target.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: target.dim(),
        });
    }

    let mode_line: Vec<&str> = next_line(&mut pos)?.split_whitespace().collect();
    let mode = match mode_line.as_slice() {
        ["mode", tok] => VerifyMode::parse_token(tok)?,
        _ => {
            return Err(Error::Parse(
                "expected trailer `mode <exact|nu|trop>`".into(),
            ))
        }
    };
    if pos != lines.len() {
        return Err(Error::Parse(format!("trailing line `{}`", lines[pos])));
    }
    Ok(Factorization {
        factors,
        target,
        mode,
    })
}

fn parse_row(tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad row index `{tok}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: i64) -> Scalar {
        Scalar::int(v)
    }

    fn swap(i: usize, j: usize) -> ElementaryMatrix {
        ElementaryMatrix::swap(3, i, j).unwrap()
    }

    fn scale(i: usize, v: i64) -> ElementaryMatrix {
        ElementaryMatrix::scale(3, i, t(v)).unwrap()
    }

    fn addmul(i: usize, j: usize, v: i64) -> ElementaryMatrix {
        ElementaryMatrix::add_multiple(3, i, j, t(v)).unwrap()
    }

    #[test]
    fn expansion_of_each_kind() {
        let s = ElementaryMatrix::swap(2, 1, 2).unwrap().expand();
        assert_eq!(
            s,
            Matrix::from_int_rows(&[&[None, Some(0)], &[Some(0), None]])
        );
        let d = scale(2, 5).expand();
        assert_eq!(d, Matrix::from_diagonal(vec![t(0), t(5), t(0)]));
        let a = addmul(3, 1, -3).expand();
        let mut expected = Matrix::identity(3);
        *expected.at_mut(2, 0) = t(-3);
        assert_eq!(a, expected);
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(ElementaryMatrix::swap(3, 2, 2).is_err());
        assert!(ElementaryMatrix::swap(3, 0, 1).is_err());
        assert!(ElementaryMatrix::scale(3, 1, Scalar::ghost_int(2)).is_err());
        assert!(ElementaryMatrix::scale(3, 1, Scalar::NegInf).is_err());
        assert!(ElementaryMatrix::add_multiple(3, 1, 1, t(2)).is_err());
        assert!(ElementaryMatrix::add_multiple(3, 4, 1, t(2)).is_err());
    }

    #[test]
    fn empty_product_is_identity() {
        assert_eq!(eval_factors(3, &[]).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn swap_is_an_involution() {
        let product = eval_factors(3, &[swap(1, 2), swap(1, 2)]).unwrap();
        assert_eq!(product, Matrix::identity(3));
    }

    #[test]
    fn self_verification_in_every_mode() {
        let factors = vec![scale(2, 5), addmul(1, 3, -2), swap(2, 3)];
        let target = eval_factors(3, &factors).unwrap();
        for mode in [
            VerifyMode::ExactSupertropical,
            VerifyMode::NuEquivalent,
            VerifyMode::ExactTropical,
        ] {
            let f = Factorization {
                factors: factors.clone(),
                target: target.clone(),
                mode,
            };
            assert!(f.verify().unwrap());
        }
    }

    #[test]
    fn verification_notices_a_perturbed_coefficient() {
        let factors = vec![addmul(1, 2, -3), addmul(2, 1, -4)];
        let target = eval_factors(3, &factors).unwrap();
        let mut wrong = factors.clone();
        wrong[0] = addmul(1, 2, -2);
        let f = Factorization {
            factors: wrong,
            target,
            mode: VerifyMode::ExactSupertropical,
        };
        assert!(!f.verify().unwrap());
    }

    #[test]
    fn push_through_a_swap_relabels() {
        let reordered = push_type3_left(&[swap(1, 2), addmul(1, 2, 7)]).unwrap();
        assert_eq!(reordered, vec![addmul(2, 1, 7), swap(1, 2)]);
    }

    #[test]
    fn push_through_a_scale_of_the_target_multiplies() {
        let reordered = push_type3_left(&[scale(1, 4), addmul(1, 3, 7)]).unwrap();
        assert_eq!(reordered, vec![addmul(1, 3, 11), scale(1, 4)]);
    }

    #[test]
    fn push_through_a_scale_of_the_source_divides() {
        let reordered = push_type3_left(&[scale(3, 4), addmul(1, 3, 7)]).unwrap();
        assert_eq!(reordered, vec![addmul(1, 3, 3), scale(3, 4)]);
    }

    #[test]
    fn already_normalized_lists_are_untouched() {
        let factors = vec![addmul(1, 2, 5)];
        assert_eq!(push_type3_left(&factors).unwrap(), factors);
    }

    #[test]
    fn reordering_preserves_the_product() {
        let factors = vec![
            scale(1, 2),
            swap(2, 3),
            addmul(3, 1, -1),
            scale(3, -5),
            addmul(1, 2, 4),
            swap(1, 3),
            addmul(2, 3, 0),
        ];
        let reordered = push_type3_left(&factors).unwrap();
        assert_eq!(
            eval_factors(3, &factors).unwrap(),
            eval_factors(3, &reordered).unwrap()
        );
        let first_non_add = reordered
            .iter()
            .position(|f| !f.is_add_multiple())
            .unwrap_or(reordered.len());
        assert!(reordered[first_non_add..]
            .iter()
            .all(|f| !f.is_add_multiple()));
    }

    #[test]
    fn factor_lines_render_and_match() {
        assert_eq!(swap(1, 2).to_string(), "swap 1 2");
        assert_eq!(scale(2, 5).to_string(), "scale 2 5");
        assert_eq!(addmul(3, 1, -3).to_string(), "addmul 3 1 -3");
        assert_eq!(
            ElementaryMatrix::add_multiple(3, 1, 2, Scalar::ratio(-5, 2))
                .unwrap()
                .to_string(),
            "addmul 1 2 -5/2"
        );
    }

    fn no_files(path: &str) -> crate::error::Result<Matrix> {
        Err(crate::error::Error::Parse(format!("no file `{path}`")))
    }

    #[test]
    fn factorization_file_round_trips() {
        let factors = vec![scale(2, 5), swap(1, 3), addmul(3, 1, -3)];
        let target = eval_factors(3, &factors).unwrap();
        let f = Factorization {
            factors,
            target,
            mode: VerifyMode::ExactSupertropical,
        };
        let text = render_factorization(&f);
        let parsed = parse_factorization(&text, no_files).unwrap();
        assert_eq!(parsed, f);
    }

    #[test]
    fn factorization_file_resolves_target_paths() {
        let text = "n 2\nswap 1 2\ntarget file some.mat\nmode trop\n";
        let parsed = parse_factorization(text, |path| {
            assert_eq!(path, "some.mat");
            Ok(Matrix::identity(2))
        })
        .unwrap();
        assert_eq!(parsed.target, Matrix::identity(2));
        assert_eq!(parsed.mode, VerifyMode::ExactTropical);
    }

    #[test]
    fn factorization_file_rejects_malformed_input() {
        assert!(parse_factorization("", no_files).is_err());
        assert!(parse_factorization("n 2\nswap 1 2\n", no_files).is_err());
        assert!(parse_factorization(
            "n 2\nfrobnicate\ntarget inline\n2\n0 0\n0 0\nmode exact\n",
            no_files
        )
        .is_err());
        assert!(
            parse_factorization("n 2\ntarget inline\n2\n0 0\n0 0\nmode sloppy\n", no_files)
                .is_err()
        );
        // Dimension disagreement between header and target.
        assert!(
            parse_factorization("n 3\ntarget inline\n2\n0 0\n0 0\nmode exact\n", no_files).is_err()
        );
    }
}
