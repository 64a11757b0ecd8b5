use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::hnf::row_hnf;
use super::matrix::{axpy_neg, is_zero_vec, IntMatrix, IntVec};
use super::snf::snf;
use crate::error::{Error, Result};

/// A subgroup of `Z^n`, stored by its canonical Hermite basis.
///
/// Two lattices are equal exactly when their stored bases are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    ambient: usize,
    /// Basis vectors in echelon order; vector `j` has leading index `pivots[j]`.
    vectors: Vec<IntVec>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(ambient: usize, gens: Vec<IntVec>) -> Self {
        for g in &gens {
            assert_eq!(g.len(), ambient, "generator length");
        }
        let ech = row_hnf(gens, ambient, false);
        let r = ech.rank();
        let mut vectors = ech.rows;
        vectors.truncate(r);
        Lattice { ambient, vectors, pivots: ech.pivots }
    }

    /// Lattice spanned by the columns of `m`.
    pub fn from_columns(m: &IntMatrix) -> Self {
        Self::from_generators(m.rows(), m.col_vecs())
    }

    pub fn zero(ambient: usize) -> Self {
        Lattice { ambient, vectors: vec![], pivots: vec![] }
    }

    pub fn full(ambient: usize) -> Self {
        Self::scaled(ambient, &BigInt::one())
    }

    /// `k Z^n` for `k > 0`.
    pub fn scaled(ambient: usize, k: &BigInt) -> Self {
        assert!(k.is_positive());
        let vectors = (0..ambient)
            .map(|i| {
                let mut v = vec![BigInt::zero(); ambient];
                v[i] = k.clone();
                v
            })
            .collect();
        Lattice { ambient, vectors, pivots: (0..ambient).collect() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient
    }

    pub fn vectors(&self) -> &[IntVec] {
        &self.vectors
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis as matrix columns (ambient x rank).
    pub fn basis(&self) -> IntMatrix {
        IntMatrix::from_cols(&self.vectors, self.ambient)
    }

    /// Index `[Z^n : L]` for a full-rank lattice.
    pub fn index(&self) -> Option<BigInt> {
        if !self.is_full_rank() {
            return None;
        }
        Some(
            self.vectors
                .iter()
                .zip(&self.pivots)
                .map(|(v, &c)| v[c].clone())
                .product(),
        )
    }

    /// Coordinates `c` with `basis * c = v`, or `None` when `v` is not in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<IntVec> {
        assert_eq!(v.len(), self.ambient, "vector length");
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for (b, &c) in self.vectors.iter().zip(&self.pivots) {
            if rest[..c].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, r) = rest[c].div_rem(&b[c]);
            if !r.is_zero() {
                return None;
            }
            if !q.is_zero() {
                axpy_neg(&mut rest, &q, b, c);
            }
            coords.push(q);
        }
        if is_zero_vec(&rest) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        self.ambient == other.ambient && other.vectors.iter().all(|v| self.contains(v))
    }

    /// Canonical representative of `v + L`: each pivot entry lands in `[0, pivot)`.
    pub fn reduce(&self, v: &[BigInt]) -> IntVec {
        let mut rest = v.to_vec();
        for (b, &c) in self.vectors.iter().zip(&self.pivots) {
            let q = rest[c].div_floor(&b[c]);
            if !q.is_zero() {
                axpy_neg(&mut rest, &q, b, c);
            }
        }
        rest
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.check_ambient(other, "lattice sum")?;
        let mut gens = self.vectors.clone();
        gens.extend(other.vectors.iter().cloned());
        Ok(Lattice::from_generators(self.ambient, gens))
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.check_ambient(other, "lattice intersection")?;
        if self.rank() == 0 || other.rank() == 0 {
            return Ok(Lattice::zero(self.ambient));
        }
        // Kernel of [B1 | -B2]; the B1-part of each kernel vector lands in both.
        let b1 = self.basis();
        let b2 = other.basis().scale(&BigInt::from(-1));
        let k = kernel_basis(&b1.hstack(&b2));
        let r1 = self.rank();
        let gens = k
            .vectors()
            .iter()
            .map(|kv| b1.mul_vec(&kv[..r1]))
            .collect();
        Ok(Lattice::from_generators(self.ambient, gens))
    }

    /// Image of the lattice under `m` (rows x ambient).
    pub fn image(&self, m: &IntMatrix) -> Lattice {
        assert_eq!(m.cols(), self.ambient);
        let gens = self.vectors.iter().map(|v| m.mul_vec(v)).collect();
        Lattice::from_generators(m.rows(), gens)
    }

    /// `{x : m x ∈ L}` for `m` with `rows = ambient`.
    pub fn preimage(&self, m: &IntMatrix) -> Lattice {
        assert_eq!(m.rows(), self.ambient);
        let n = m.cols();
        let stacked = m.hstack(&self.basis().scale(&BigInt::from(-1)));
        let k = kernel_basis(&stacked);
        let gens = k.vectors().iter().map(|v| v[..n].to_vec()).collect();
        Lattice::from_generators(n, gens)
    }

    /// Coordinates of every basis vector of `sub` in this lattice's basis (rank x sub.rank).
    pub fn coordinate_matrix(&self, sub: &Lattice) -> Result<IntMatrix> {
        self.check_ambient(sub, "coordinate matrix")?;
        let cols = sub
            .vectors
            .iter()
            .map(|v| self.coordinates(v).ok_or(Error::NotContained))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix::from_cols(&cols, self.rank()))
    }

    /// Whether `sub` is a primitive (saturated) sublattice: `L ∩ Q sub = sub`.
    pub fn is_primitive(&self, sub: &Lattice) -> Result<bool> {
        let c = self.coordinate_matrix(sub)?;
        Ok(snf(&c).diagonal().iter().all(One::is_one))
    }

    fn check_ambient(&self, other: &Lattice, op: &'static str) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch { op, left: self.ambient, right: other.ambient });
        }
        Ok(())
    }
}

/// Z-basis of `{x : A x = 0}`.
pub fn kernel_basis(a: &IntMatrix) -> Lattice {
    let n = a.cols();
    let ech = row_hnf(a.transpose().row_vecs(), a.rows(), true);
    let r = ech.rank();
    let mut t = ech.transform.expect("tracked");
    let gens = t.split_off(r);
    Lattice::from_generators(n, gens)
}

/// Invariant factors of `amb / sub`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientInvariants {
    /// Full divisibility chain, unit factors included.
    pub factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl QuotientInvariants {
    /// Factors different from 1.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion().is_empty()
    }

    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.factors.iter().product())
    }

    /// Human-readable group, e.g. `Z/2 + Z/6 + Z^2` or `0`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.torsion().iter().map(|d| format!("Z/{d}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

pub fn quotient_invariants(amb: &Lattice, sub: &Lattice) -> Result<QuotientInvariants> {
    let c = amb.coordinate_matrix(sub)?;
    let r = snf(&c);
    let factors = r.diagonal();
    Ok(QuotientInvariants { free_rank: amb.rank() - factors.len(), factors })
}

/// Some integer solution of `A x = b`, or `None` when none exists.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<IntVec> {
    assert_eq!(a.rows(), b.len());
    // Column echelon A U = H, then forward substitution on H.
    let ech = row_hnf(a.transpose().row_vecs(), a.rows(), true);
    let u = ech.transform.expect("tracked");
    let mut rest = b.to_vec();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (j, &c) in ech.pivots.iter().enumerate() {
        let h = &ech.rows[j];
        if rest[..c].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let (q, r) = rest[c].div_rem(&h[c]);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            axpy_neg(&mut rest, &q, h, c);
        }
        y[j] = q;
    }
    if !is_zero_vec(&rest) {
        return None;
    }
    // x = U^T-combination: x = sum_j y_j * u_j (rows of the row transform).
    let mut x = vec![BigInt::zero(); a.cols()];
    for (yj, uj) in y.iter().zip(&u) {
        if yj.is_zero() {
            continue;
        }
        for (xi, ui) in x.iter_mut().zip(uj) {
            *xi += yj * ui;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::vec_from_i64;

    fn lat(ambient: usize, gens: &[&[i64]]) -> Lattice {
        Lattice::from_generators(ambient, gens.iter().map(|g| vec_from_i64(g)).collect())
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(k, lat(2, &[&[1, -1]]));
        let k = kernel_basis(&IntMatrix::from_i64(&[&[1, 1], &[1, 1]]));
        assert_eq!(k, lat(2, &[&[1, -1]]));
        let aug = IntMatrix::from_i64(&[&[1, 1, 1, 1, 1]]);
        assert_eq!(kernel_basis(&aug).rank(), 4);
    }

    #[test]
    fn intersections() {
        let l = lat(2, &[&[2, 0], &[1, 1]]);
        assert_eq!(l.intersect(&l).unwrap(), l);
        let a = Lattice::scaled(2, &BigInt::from(2));
        let b = Lattice::scaled(2, &BigInt::from(3));
        assert_eq!(a.intersect(&b).unwrap(), Lattice::scaled(2, &BigInt::from(6)));
        assert!(a.intersect(&Lattice::zero(3)).is_err());
    }

    #[test]
    fn canonical_forms() {
        // (-1,1) = (1,1) - (2,0): both generating sets give the same lattice.
        let a = lat(2, &[&[2, 0], &[1, 1]]);
        let b = lat(2, &[&[1, 1], &[-1, 1]]);
        assert_eq!(a, b);
        let c = lat(2, &[&[2, 0], &[0, 1]]);
        let d = lat(2, &[&[1, 0], &[0, 2]]);
        assert_eq!(c.index(), d.index());
        assert_ne!(c, d);
        assert!(c.contains(&vec_from_i64(&[0, 1])) && !d.contains(&vec_from_i64(&[0, 1])));
    }

    #[test]
    fn quotients() {
        let z2 = Lattice::full(2);
        let q = quotient_invariants(&z2, &Lattice::scaled(2, &BigInt::from(2))).unwrap();
        assert_eq!(q.torsion(), vec_from_i64(&[2, 2]));
        assert_eq!(q.free_rank, 0);
        let q = quotient_invariants(&z2, &lat(2, &[&[2, 0]])).unwrap();
        assert_eq!(q.torsion(), vec_from_i64(&[2]));
        assert_eq!(q.free_rank, 1);
        assert!(quotient_invariants(&Lattice::scaled(2, &BigInt::from(2)), &z2).is_err());
    }

    #[test]
    fn membership() {
        let l = Lattice::scaled(2, &BigInt::from(2));
        assert_eq!(l.coordinates(&vec_from_i64(&[0, 0])), Some(vec_from_i64(&[0, 0])));
        assert_eq!(l.coordinates(&vec_from_i64(&[2, 0])), Some(vec_from_i64(&[1, 0])));
        assert_eq!(l.coordinates(&vec_from_i64(&[1, 1])), None);
    }

    #[test]
    fn integer_solve() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[0, 3]]);
        let x = solve_integer(&a, &vec_from_i64(&[6, 3])).unwrap();
        assert_eq!(a.mul_vec(&x), vec_from_i64(&[6, 3]));
        assert!(solve_integer(&IntMatrix::from_i64(&[&[2, 4]]), &vec_from_i64(&[3])).is_none());
    }
}
