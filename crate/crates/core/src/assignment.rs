//! Maximum-weight assignment over exact rationals with forbidden cells.
//!
//! Permutation enumeration stops being viable past small dimensions, so the
//! determinant switches to an assignment solver: a Hungarian-style shortest
//! augmenting path method with potentials, run on negated weights. `None`
//! marks a forbidden cell (`-inf` entry). The solver is exact; combined with
//! a second-best probe it recovers the tie information that ghost bookkeeping
//! needs.

use num_rational::BigRational;

use crate::perm::Permutation;

/// Cost with `None` as +infinity.
type Cost = Option<BigRational>;

fn cost_lt(a: &Cost, b: &Cost) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Finds a maximum-weight perfect matching on the bipartite graph whose
/// edge `(i, j)` has weight `weights[i][j]`; `None` entries are absent edges.
/// Returns the row-to-column permutation and the total weight, or `None`
/// when no perfect matching exists on the finite entries.
pub fn max_assignment(weights: &[Vec<Option<BigRational>>]) -> Option<(Permutation, BigRational)> {
    let n = weights.len();
    if n == 0 {
        return None;
    }
    // Minimize negated weights. Rows and columns are shifted by one so that
    // index 0 can serve as the virtual start row/column of each augmentation.
    let cost =
        |i: usize, j: usize| -> Cost { weights[i].get(j).and_then(|w| w.as_ref().map(|v| -v)) };

    let zero = BigRational::from_integer(0.into());
    let mut u = vec![zero.clone(); n + 1];
    let mut v = vec![zero.clone(); n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j] = row occupying column j

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_to: Vec<Cost> = vec![None; n + 1];
        let mut way = vec![0usize; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta: Cost = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur: Cost = cost(i0 - 1, j - 1).map(|c| c - &u[i0] - &v[j]);
                if cost_lt(&cur, &min_to[j]) {
                    min_to[j] = cur;
                    way[j] = j0;
                }
                if cost_lt(&min_to[j], &delta) {
                    delta = min_to[j].clone();
                    j1 = j;
                }
            }
            // No finite column reachable: the finite support admits no
            // perfect matching.
            let delta = delta?;
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = min_to[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut images = vec![0usize; n];
    for j in 1..=n {
        images[matched_row[j] - 1] = j - 1;
    }
    let perm = Permutation::from_images(images);
    let mut total = zero;
    for i in 0..n {
        total += weights[i][perm.apply(i)].as_ref()?;
    }
    Some((perm, total))
}

/// Weight of the best perfect matching that avoids the cell `(row, col)`,
/// if one exists. Probing every cell of an optimal matching this way decides
/// whether a second permutation attains the optimum.
pub fn best_avoiding(
    weights: &[Vec<Option<BigRational>>],
    row: usize,
    col: usize,
) -> Option<BigRational> {
    let mut masked = weights.to_vec();
    masked[row][col] = None;
    max_assignment(&masked).map(|(_, w)| w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn w(v: i64) -> Option<BigRational> {
        Some(BigRational::from_integer(BigInt::from(v)))
    }

    #[test]
    fn picks_the_heavier_diagonal() {
        let weights = vec![vec![w(5), w(1)], vec![w(1), w(5)]];
        let (perm, total) = max_assignment(&weights).unwrap();
        assert!(perm.is_identity());
        assert_eq!(total, BigRational::from_integer(BigInt::from(10)));
    }

    #[test]
    fn respects_forbidden_cells() {
        let weights = vec![vec![None, w(1)], vec![w(2), w(100)]];
        let (perm, total) = max_assignment(&weights).unwrap();
        assert_eq!(perm.images(), &[1, 0]);
        assert_eq!(total, BigRational::from_integer(BigInt::from(3)));
    }

    #[test]
    fn reports_infeasible_support() {
        let weights = vec![vec![None, None], vec![w(2), w(1)]];
        assert!(max_assignment(&weights).is_none());
    }

    #[test]
    fn second_best_detects_ties() {
        let weights = vec![vec![w(0), w(0)], vec![w(0), w(0)]];
        let (perm, total) = max_assignment(&weights).unwrap();
        let alt = best_avoiding(&weights, 0, perm.apply(0)).unwrap();
        assert_eq!(total, alt);
    }
}
