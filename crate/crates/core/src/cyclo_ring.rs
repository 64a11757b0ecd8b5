//! Arithmetic in `Z[x]` and in the group ring `R = Z[C_p] = Z[x]/(x^p - 1)`.
//!
//! `t = x - 1` and `s = 1 + x + ... + x^(p-1)` are the two distinguished
//! elements; `ts = x^p - 1` vanishes in `R`. [`solve_lemma_1_11`] produces the
//! polynomials `h, f, g` with `t^(p-1) = p h + s` and
//! `p = -t^(p-1) + t^p f + s g`, together with the substitution trail that
//! builds `f` and `g`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::IntMatrix;

/// Polynomial over Z, dense, lowest degree first. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PolyZ {
    coeffs: Vec<BigInt>,
}

impl PolyZ {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PolyZ { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        PolyZ { coeffs: vec![] }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        PolyZ { coeffs: c }
    }

    /// `t = x - 1`.
    pub fn t() -> Self {
        Self::from_i64(&[-1, 1])
    }

    /// `s = 1 + x + ... + x^(p-1)`.
    pub fn s(p: usize) -> Self {
        Self::new(vec![BigInt::one(); p])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = PolyZ::constant(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient `self / d` over Z; fails if `d` does not divide `self` in `Z[x]`.
    pub fn div_exact(&self, d: &PolyZ) -> Result<PolyZ> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::InexactDivision("division by the zero polynomial".into()))?;
        let lead = &d.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return if self.is_zero() {
                Ok(PolyZ::zero())
            } else {
                Err(Error::InexactDivision(format!("{self} by {d}")))
            };
        }
        let mut q = vec![BigInt::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let (c, r) = rem[k + dd].div_rem(lead);
            if !r.is_zero() {
                return Err(Error::InexactDivision(format!("{self} by {d}")));
            }
            for (i, dc) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &c * dc;
            }
            q[k] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::InexactDivision(format!("{self} by {d}")));
        }
        Ok(PolyZ::new(q))
    }

    /// Image in `R = Z[x]/(x^p - 1)`.
    pub fn to_ring(&self, p: usize) -> RingElt {
        let mut c = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[i % p] += a;
        }
        RingElt { p, coeffs: c }
    }
}

impl fmt::Display for PolyZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{a}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &PolyZ {
    type Output = PolyZ;
    fn add(self, o: &PolyZ) -> PolyZ {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyZ::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &PolyZ {
    type Output = PolyZ;
    fn sub(self, o: &PolyZ) -> PolyZ {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyZ::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &PolyZ {
    type Output = PolyZ;
    fn mul(self, o: &PolyZ) -> PolyZ {
        if self.is_zero() || o.is_zero() {
            return PolyZ::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyZ::new(c)
    }
}

impl Neg for &PolyZ {
    type Output = PolyZ;
    fn neg(self) -> PolyZ {
        PolyZ::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Element of `Z[C_p]`: coefficient `i` multiplies `alpha^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingElt {
    p: usize,
    coeffs: Vec<BigInt>,
}

impl RingElt {
    pub fn new(p: usize, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != p {
            return Err(Error::Precondition(format!(
                "ring element over C_{p} needs {p} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(RingElt { p, coeffs })
    }

    pub fn from_i64(p: usize, c: &[i64]) -> Result<Self> {
        Self::new(p, c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(p: usize) -> Self {
        RingElt { p, coeffs: vec![BigInt::zero(); p] }
    }

    pub fn scalar(p: usize, k: impl Into<BigInt>) -> Self {
        let mut e = Self::zero(p);
        e.coeffs[0] = k.into();
        e
    }

    pub fn one(p: usize) -> Self {
        Self::scalar(p, 1)
    }

    /// `alpha^k`.
    pub fn alpha_pow(p: usize, k: usize) -> Self {
        let mut e = Self::zero(p);
        e.coeffs[k % p] = BigInt::one();
        e
    }

    pub fn t(p: usize) -> Self {
        PolyZ::t().to_ring(p)
    }

    pub fn s(p: usize) -> Self {
        PolyZ::s(p).to_ring(p)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check(&self, o: &RingElt) -> Result<()> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        Ok(())
    }

    pub fn add(&self, o: &RingElt) -> Result<RingElt> {
        self.check(o)?;
        Ok(RingElt { p: self.p, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &RingElt) -> Result<RingElt> {
        self.check(o)?;
        Ok(RingElt { p: self.p, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() })
    }

    pub fn mul(&self, o: &RingElt) -> Result<RingElt> {
        self.check(o)?;
        let p = self.p;
        let mut c = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    c[(i + j) % p] += a * b;
                }
            }
        }
        Ok(RingElt { p, coeffs: c })
    }

    pub fn scale(&self, k: &BigInt) -> RingElt {
        RingElt { p: self.p, coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn pow(&self, e: usize) -> RingElt {
        let mut acc = RingElt::one(self.p);
        for _ in 0..e {
            acc = acc.mul(self).expect("same prime");
        }
        acc
    }

    /// Evaluation at `alpha = 1` (sum of coefficients).
    pub fn augment(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Whether `t` divides this element in `R`; equivalent to `augment() == 0`.
    pub fn divisible_by_t(&self) -> bool {
        self.augment().is_zero()
    }

    /// Matrix of `sum_i c_i A^i` for an action matrix `A` of order dividing `p`.
    pub fn act(&self, action: &IntMatrix) -> IntMatrix {
        let n = action.rows();
        let mut acc = IntMatrix::zeros(n, n);
        let mut power = IntMatrix::identity(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&power.scale(c));
            }
            if i + 1 < self.p {
                power = power.dot(action);
            }
        }
        acc
    }
}

impl fmt::Display for RingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = PolyZ::new(self.coeffs.clone()).to_string();
        write!(f, "{}", s.replace('x', "a"))
    }
}

/// Free-function form of multiplication in `R`.
pub fn ring_mul(a: &RingElt, b: &RingElt) -> Result<RingElt> {
    a.mul(b)
}

pub fn augment(a: &RingElt) -> BigInt {
    a.augment()
}

/// The polynomials `h, f, g` and the audit trail of their construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingIdentities {
    pub p: usize,
    /// `t^(p-1) = p h + s`, `h(1) = -1`.
    pub h: PolyZ,
    /// `p = -t^(p-1) + t^p f + s g`.
    pub f: PolyZ,
    pub g: PolyZ,
    /// `h = t beta - 1`.
    pub beta: PolyZ,
    /// Partial sums `S_n = 1 + (t beta) + ... + (t beta)^n` after each substitution
    /// round; the identity after round `n` reads
    /// `p = (s - t^(p-1)) S_n + (t beta)^(n+1) p`.
    pub rounds: Vec<PolyZ>,
}

pub fn solve_lemma_1_11(p: usize) -> Result<RingIdentities> {
    crate::check_prime(p)?;
    let t = PolyZ::t();
    let s = PolyZ::s(p);
    let pz = BigInt::from(p);
    let tp = t.pow(p);
    let numer = &tp - &(&t * &s);
    let h = numer.div_exact(&t.scale(&pz))?;
    let beta = (&h + &PolyZ::constant(1)).div_exact(&t)?;
    let tb = &t * &beta;
    let mut rounds = vec![PolyZ::constant(1)];
    let mut term = PolyZ::constant(1);
    for _ in 1..p {
        term = &term * &tb;
        let next = rounds.last().expect("nonempty") + &term;
        rounds.push(next);
    }
    // q_sum = S_(p-2); f = p beta^p - beta S_(p-2); g = S_(p-1).
    let g = rounds[p - 1].clone();
    let q_sum = &rounds[p - 2];
    let f = &beta.pow(p).scale(&pz) - &(&beta * q_sum);
    let out = RingIdentities { p, h, f, g, beta, rounds };
    if !out.verify() {
        return Err(Error::Internal(format!("identities fail for p = {p}")));
    }
    Ok(out)
}

impl RingIdentities {
    /// Re-checks both identities and `h(1) = -1` by direct expansion.
    pub fn verify(&self) -> bool {
        let t = PolyZ::t();
        let s = PolyZ::s(self.p);
        let pz = PolyZ::constant(self.p as i64);
        let tp1 = t.pow(self.p - 1);
        let first = tp1 == &(&self.h * &pz) + &s;
        let rhs = &(&(-&tp1) + &(&t.pow(self.p) * &self.f)) + &(&s * &self.g);
        let second = rhs == pz;
        let h1 = self.h.eval(&BigInt::one()) == BigInt::from(-1);
        first && second && h1
    }
}

/// Checks `t^(k(p-1)) = p^k h^k + (-1)^(k-1) p^(k-1) s` in `R`.
pub fn power_identity_check(p: usize, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let lem = solve_lemma_1_11(p)?;
    let pz = BigInt::from(p);
    let lhs = RingElt::t(p).pow(k * (p - 1));
    let h = lem.h.to_ring(p);
    let sign = if (k - 1).is_multiple_of(2) { BigInt::one() } else { BigInt::from(-1) };
    let rhs = h
        .pow(k)
        .scale(&Pow::pow(&pz, k))
        .add(&RingElt::s(p).scale(&(sign * Pow::pow(&pz, k - 1))))?;
    Ok(lhs == rhs)
}
