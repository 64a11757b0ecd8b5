//! Hermite normal form.
//!
//! The engine works on generator *rows*: it returns an upper echelon form whose
//! pivots are positive, with every entry above a pivot reduced into
//! `[0, pivot)`. Zero rows are pushed to the bottom. Pivot selection is fixed:
//! within a column the row with the smallest nonzero absolute value (first
//! such row on ties) is moved to the pivot slot before elimination, and
//! non-divisible pairs are merged with the extended-gcd 2x2 transform. The
//! output is therefore a deterministic function of the input.
//!
//! [`hnf`] exposes the column convention `H = A U` used by lattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{axpy_neg, combine_pair, IntMatrix, IntVec};

pub(crate) struct RowEchelon {
    /// All rows, nonzero rows first.
    pub rows: Vec<IntVec>,
    /// Pivot column of each nonzero row.
    pub pivots: Vec<usize>,
    /// `transform * input = rows` when tracked.
    pub transform: Option<Vec<IntVec>>,
}

impl RowEchelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn identity_rows(n: usize) -> Vec<IntVec> {
    (0..n)
        .map(|i| {
            let mut r = vec![BigInt::zero(); n];
            r[i] = BigInt::one();
            r
        })
        .collect()
}

/// Row-style Hermite normal form of the matrix whose rows are `a`.
pub(crate) fn row_hnf(mut a: Vec<IntVec>, ncols: usize, track: bool) -> RowEchelon {
    let m = a.len();
    let mut u = if track { Some(identity_rows(m)) } else { None };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        loop {
            // Smallest nonzero entry at or below r becomes the pivot.
            let best = (r..m)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(best) = best else { break };
            if best != r {
                a.swap(best, r);
                if let Some(u) = u.as_mut() {
                    u.swap(best, r);
                }
            }
            let mut dirty = false;
            for i in r + 1..m {
                if a[i][c].is_zero() {
                    continue;
                }
                let (q, rem) = a[i][c].div_rem(&a[r][c]);
                if rem.is_zero() {
                    let (head, tail) = a.split_at_mut(i);
                    axpy_neg(&mut tail[0], &q, &head[r], c);
                    if let Some(u) = u.as_mut() {
                        let (uh, ut) = u.split_at_mut(i);
                        axpy_neg(&mut ut[0], &q, &uh[r], 0);
                    }
                } else {
                    let eg = a[r][c].extended_gcd(&a[i][c]);
                    let p = &a[r][c] / &eg.gcd;
                    let qq = &a[i][c] / &eg.gcd;
                    let (head, tail) = a.split_at_mut(i);
                    combine_pair(&mut head[r], &mut tail[0], &eg.x, &eg.y, &qq, &p, c);
                    if let Some(u) = u.as_mut() {
                        let (uh, ut) = u.split_at_mut(i);
                        combine_pair(&mut uh[r], &mut ut[0], &eg.x, &eg.y, &qq, &p, 0);
                    }
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        if r >= m || a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r][c..].iter_mut() {
                *x = -&*x;
            }
            if let Some(u) = u.as_mut() {
                for x in u[r].iter_mut() {
                    *x = -&*x;
                }
            }
        }
        for k in 0..r {
            if a[k][c].is_zero() {
                continue;
            }
            let q = a[k][c].div_floor(&a[r][c]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = a.split_at_mut(r);
            axpy_neg(&mut head[k], &q, &tail[0], c);
            if let Some(u) = u.as_mut() {
                let (uh, ut) = u.split_at_mut(r);
                axpy_neg(&mut uh[k], &q, &ut[0], 0);
            }
        }
        pivots.push(c);
        r += 1;
    }
    RowEchelon { rows: a, pivots, transform: u }
}

/// Column Hermite normal form: returns `(H, U)` with `H = A U`, `U` unimodular.
///
/// Nonzero columns of `H` come first; column `j` has its leading nonzero entry
/// (a positive pivot) in a row strictly below that of column `j - 1`, and the
/// entries of the pivot row to the left of a pivot lie in `[0, pivot)`.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let at = a.transpose();
    let ech = row_hnf(at.row_vecs(), a.rows(), true);
    let h = IntMatrix::from_rows(ech.rows, a.rows()).transpose();
    let v = IntMatrix::from_rows(ech.transform.expect("tracked"), a.cols());
    (h, v.transpose())
}

/// Rank of an integer matrix.
pub fn rank(a: &IntMatrix) -> usize {
    if a.rows() <= a.cols() {
        row_hnf(a.row_vecs(), a.cols(), false).rank()
    } else {
        row_hnf(a.transpose().row_vecs(), a.rows(), false).rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed() {
        let i3 = IntMatrix::identity(3);
        let (h, u) = hnf(&i3);
        assert_eq!(h, i3);
        assert_eq!(u, i3);
    }

    #[test]
    fn diagonal_already_triangular() {
        let d = IntMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        let (h, u) = hnf(&d);
        assert_eq!(h, d);
        assert!(u.is_unimodular());
    }

    #[test]
    fn transform_reproduces_h() {
        let a = IntMatrix::from_i64(&[&[4, 6, 2], &[3, -9, 12], &[5, 1, 0]]);
        let (h, u) = hnf(&a);
        assert_eq!(a.dot(&u), h);
        assert!(u.is_unimodular());
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = IntMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert_eq!(rank(&a), 1);
        assert_eq!(rank(&IntMatrix::zeros(2, 3)), 0);
    }
}
