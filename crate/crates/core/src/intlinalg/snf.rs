//! Smith normal form with both transforms.
//!
//! Pivot rule: at step `t` the entry of smallest absolute value in the
//! trailing submatrix (first in row-major order on ties) is moved to `(t, t)`.
//! Rows and columns are cleared with exact quotients when possible and with
//! the extended-gcd 2x2 transform otherwise. If the cleared pivot fails to
//! divide a trailing entry, that entry's row is added to row `t` and the step
//! repeats. Results are deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{axpy_neg, combine_pair, IntMatrix, IntVec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries `d_1 | d_2 | ...`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.rows().min(self.s.cols());
        (0..k)
            .map(|i| self.s.get(i, i).clone())
            .take_while(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().len()
    }

    /// Cokernel `Z^rows / im A`: full invariant-factor chain (1s included) and free rank.
    pub fn cokernel(&self) -> (Vec<BigInt>, usize) {
        let d = self.diagonal();
        let free = self.s.rows() - d.len();
        (d, free)
    }
}

struct Work {
    a: Vec<IntVec>,
    u: Vec<IntVec>,
    // V is stored transposed so column operations become row operations.
    vt: Vec<IntVec>,
    n: usize,
}

impl Work {
    fn col_combine(&mut self, t: usize, j: usize, x: &BigInt, y: &BigInt, q: &BigInt, p: &BigInt) {
        for row in self.a.iter_mut() {
            let (at, aj) = (row[t].clone(), row[j].clone());
            if at.is_zero() && aj.is_zero() {
                continue;
            }
            row[t] = x * &at + y * &aj;
            row[j] = p * &aj - q * &at;
        }
        let (lo, hi) = self.vt.split_at_mut(j);
        combine_pair(&mut lo[t], &mut hi[0], x, y, q, p, 0);
    }

    fn col_axpy(&mut self, j: usize, k: &BigInt, t: usize) {
        // column j -= k * column t
        for row in self.a.iter_mut() {
            if !row[t].is_zero() {
                let d = k * &row[t];
                row[j] -= d;
            }
        }
        let src = self.vt[t].clone();
        axpy_neg(&mut self.vt[j], k, &src, 0);
    }
}

pub fn snf(a: &IntMatrix) -> SnfResult {
    let m = a.rows();
    let n = a.cols();
    let mut w = Work {
        a: a.row_vecs(),
        u: IntMatrix::identity(m).row_vecs(),
        vt: IntMatrix::identity(n).row_vecs(),
        n,
    };
    for t in 0..m.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..w.n {
                let e = &w.a[i][j];
                if !e.is_zero() && best.is_none_or(|(bi, bj)| e.abs() < w.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        if pi != t {
            w.a.swap(pi, t);
            w.u.swap(pi, t);
        }
        if pj != t {
            for row in w.a.iter_mut() {
                row.swap(pj, t);
            }
            w.vt.swap(pj, t);
        }
        loop {
            // Clear column t below the pivot.
            for i in t + 1..m {
                if w.a[i][t].is_zero() {
                    continue;
                }
                let (q, rem) = w.a[i][t].div_rem(&w.a[t][t]);
                let (lo, hi) = w.a.split_at_mut(i);
                let (ulo, uhi) = w.u.split_at_mut(i);
                if rem.is_zero() {
                    axpy_neg(&mut hi[0], &q, &lo[t], t);
                    axpy_neg(&mut uhi[0], &q, &ulo[t], 0);
                } else {
                    let eg = lo[t][t].extended_gcd(&hi[0][t]);
                    let p = &lo[t][t] / &eg.gcd;
                    let qq = &hi[0][t] / &eg.gcd;
                    combine_pair(&mut lo[t], &mut hi[0], &eg.x, &eg.y, &qq, &p, t);
                    combine_pair(&mut ulo[t], &mut uhi[0], &eg.x, &eg.y, &qq, &p, 0);
                }
            }
            // Clear row t to the right.
            for j in t + 1..w.n {
                if w.a[t][j].is_zero() {
                    continue;
                }
                let (q, rem) = w.a[t][j].div_rem(&w.a[t][t]);
                if rem.is_zero() {
                    w.col_axpy(j, &q, t);
                } else {
                    let eg = w.a[t][t].extended_gcd(&w.a[t][j]);
                    let p = &w.a[t][t] / &eg.gcd;
                    let qq = &w.a[t][j] / &eg.gcd;
                    w.col_combine(t, j, &eg.x, &eg.y, &qq, &p);
                }
            }
            if (t + 1..m).any(|i| !w.a[i][t].is_zero()) {
                continue;
            }
            // Divisibility condition on the trailing block.
            let piv = w.a[t][t].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..w.n).any(|j| !w.a[i][j].is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    let (lo, hi) = w.a.split_at_mut(i);
                    let src = hi[0].clone();
                    for (d, s) in lo[t].iter_mut().zip(&src) {
                        *d += s;
                    }
                    let (ulo, uhi) = w.u.split_at_mut(i);
                    let usrc = uhi[0].clone();
                    for (d, s) in ulo[t].iter_mut().zip(&usrc) {
                        *d += s;
                    }
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            for x in w.a[t].iter_mut() {
                *x = -&*x;
            }
            for x in w.u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    let s = IntMatrix::from_rows(w.a, n);
    let u = IntMatrix::from_rows(w.u, m);
    let v = IntMatrix::from_rows(w.vt, n).transpose();
    debug_assert!(u.dot(a).dot(&v) == s);
    SnfResult { u, s, v }
}

/// Invariant factors of `Z^rows / im A`, 1s included, plus the free rank.
pub fn cokernel_invariants(a: &IntMatrix) -> (Vec<BigInt>, usize) {
    snf(a).cokernel()
}

/// Drops unit factors for display.
pub fn nontrivial(factors: &[BigInt]) -> Vec<BigInt> {
    factors.iter().filter(|d| !d.is_one()).cloned().collect()
}
