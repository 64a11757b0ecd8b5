//! Modules over `R = Z[C_p]` modelled as `Z^r / Λ` with an automorphism `U`.
//!
//! Elements are integer vectors; two vectors denote the same element when they
//! differ by a vector of `Λ`, and [`FinMod::reduce`] returns the canonical
//! representative. Subgroups and submodules are lattices `L` with
//! `Λ ⊆ L ⊆ Z^r`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::{is_zero_vec, IntMatrix, IntVec, Lattice};

/// Building-block expression for a module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModSpec {
    /// `Z/n` with trivial action.
    TrivCyclic(u64),
    /// `Z^r` with trivial action.
    TrivFree(usize),
    /// `R/(q^k)`.
    CyclicR { q: u64, k: u32 },
    /// `R^r`.
    FreeR(usize),
    /// `Z/n` with `alpha` acting as multiplication by `u`; needs `u^p = 1 mod n`.
    Twisted { n: u64, u: u64 },
    Sum(Vec<ModSpec>),
}

impl ModSpec {
    pub fn zero() -> Self {
        ModSpec::Sum(vec![])
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&ModSpec> {
        match self {
            ModSpec::Sum(parts) => parts.iter().flat_map(|s| s.leaves()).collect(),
            leaf => vec![leaf],
        }
    }

    /// Order of the module, or `None` when infinite.
    pub fn order(&self, p: usize) -> Option<BigInt> {
        match self {
            ModSpec::TrivCyclic(n) | ModSpec::Twisted { n, .. } => Some(BigInt::from(*n)),
            ModSpec::TrivFree(0) | ModSpec::FreeR(0) => Some(BigInt::one()),
            ModSpec::TrivFree(_) | ModSpec::FreeR(_) => None,
            ModSpec::CyclicR { q, k } => Some(num_traits::pow(BigInt::from(*q), (*k as usize) * p)),
            ModSpec::Sum(parts) => parts.iter().map(|s| s.order(p)).product(),
        }
    }

    /// Parses e.g. `triv(2) + cyclicR(3,1) + cyclic(5,4)`. `0` is the zero module.
    pub fn parse(text: &str) -> Result<ModSpec> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty module expression".into()));
        }
        if text == "0" {
            return Ok(ModSpec::zero());
        }
        let mut parts = Vec::new();
        for term in text.split('+') {
            parts.push(parse_leaf(term.trim())?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { ModSpec::Sum(parts) })
    }
}

fn parse_leaf(term: &str) -> Result<ModSpec> {
    let bad = || Error::Parse(format!("malformed term `{term}`"));
    let open = term.find('(').ok_or_else(bad)?;
    if !term.ends_with(')') {
        return Err(bad());
    }
    let name = term[..open].trim();
    let args: Vec<u64> = term[open + 1..term.len() - 1]
        .split(',')
        .map(|a| a.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let want = |n: usize| if args.len() == n { Ok(()) } else { Err(bad()) };
    let spec = match name {
        "triv" => {
            want(1)?;
            if args[0] == 0 {
                return Err(Error::Parse("triv(n) needs n >= 1; use trivfree(r) for Z^r".into()));
            }
            ModSpec::TrivCyclic(args[0])
        }
        "trivfree" => {
            want(1)?;
            ModSpec::TrivFree(args[0] as usize)
        }
        "cyclicR" => {
            want(2)?;
            if !crate::is_prime(args[0]) || args[1] == 0 {
                return Err(Error::Parse(format!("cyclicR(q,k) needs q prime and k >= 1 in `{term}`")));
            }
            let k = u32::try_from(args[1]).map_err(|_| bad())?;
            ModSpec::CyclicR { q: args[0], k }
        }
        "freeR" => {
            want(1)?;
            ModSpec::FreeR(args[0] as usize)
        }
        "cyclic" => {
            want(2)?;
            if args[0] == 0 {
                return Err(bad());
            }
            ModSpec::Twisted { n: args[0], u: args[1] }
        }
        _ => return Err(Error::Parse(format!("unknown module keyword `{name}`"))),
    };
    Ok(spec)
}

impl fmt::Display for ModSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModSpec::TrivCyclic(n) => write!(f, "triv({n})"),
            ModSpec::TrivFree(r) => write!(f, "trivfree({r})"),
            ModSpec::CyclicR { q, k } => write!(f, "cyclicR({q},{k})"),
            ModSpec::FreeR(r) => write!(f, "freeR({r})"),
            ModSpec::Twisted { n, u } => write!(f, "cyclic({n},{u})"),
            ModSpec::Sum(parts) if parts.is_empty() => write!(f, "0"),
            ModSpec::Sum(parts) => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join(" + "))
            }
        }
    }
}

/// A finitely generated abelian group `Z^r / Λ` with an automorphism `U` of order dividing `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinMod {
    p: usize,
    lambda: Lattice,
    action: IntMatrix,
    spec: Option<ModSpec>,
}

/// Cyclic shift on `Z^p`: `e_i -> e_(i+1 mod p)`.
fn shift_matrix(p: usize) -> IntMatrix {
    IntMatrix::permutation(&(0..p).map(|i| (i + 1) % p).collect::<Vec<_>>())
}

pub fn build(spec: &ModSpec, p: usize) -> Result<FinMod> {
    crate::check_prime(p)?;
    let (lambda_gens, action, r) = build_parts(spec, p)?;
    let lambda = Lattice::from_generators(r, lambda_gens);
    let mut m = FinMod::new(p, lambda, action)?;
    m.spec = Some(spec.clone());
    Ok(m)
}

fn build_parts(spec: &ModSpec, p: usize) -> Result<(Vec<IntVec>, IntMatrix, usize)> {
    let unit = |i: usize, r: usize, k: &BigInt| {
        let mut v = vec![BigInt::zero(); r];
        v[i] = k.clone();
        v
    };
    Ok(match spec {
        ModSpec::TrivCyclic(n) => {
            if *n == 0 {
                return Err(Error::InvalidModule("triv(0)".into()));
            }
            (vec![vec![BigInt::from(*n)]], IntMatrix::identity(1), 1)
        }
        ModSpec::TrivFree(r) => (vec![], IntMatrix::identity(*r), *r),
        ModSpec::CyclicR { q, k } => {
            let qk = num_traits::pow(BigInt::from(*q), *k as usize);
            ((0..p).map(|i| unit(i, p, &qk)).collect(), shift_matrix(p), p)
        }
        ModSpec::FreeR(r) => {
            let s = shift_matrix(p);
            let blocks: Vec<&IntMatrix> = (0..*r).map(|_| &s).collect();
            (vec![], IntMatrix::block_diag(&blocks), r * p)
        }
        ModSpec::Twisted { n, u } => {
            let nn = BigInt::from(*n);
            let uu = BigInt::from(*u);
            if !uu.gcd(&nn).is_one() && *n != 1 {
                return Err(Error::InvalidModule(format!("cyclic({n},{u}): {u} is not a unit mod {n}")));
            }
            if !uu.modpow(&BigInt::from(p), &nn).is_one() && *n != 1 {
                return Err(Error::InvalidModule(format!("cyclic({n},{u}): {u}^{p} is not 1 mod {n}")));
            }
            (vec![vec![nn]], IntMatrix::from_rows(vec![vec![uu]], 1), 1)
        }
        ModSpec::Sum(parts) => {
            let mut gens = Vec::new();
            let mut actions = Vec::new();
            let mut offset = 0;
            let built: Vec<_> = parts.iter().map(|s| build_parts(s, p)).collect::<Result<_>>()?;
            let total: usize = built.iter().map(|b| b.2).sum();
            for (g, a, r) in built {
                for v in g {
                    let mut w = vec![BigInt::zero(); total];
                    w[offset..offset + r].clone_from_slice(&v);
                    gens.push(w);
                }
                actions.push(a);
                offset += r;
            }
            let refs: Vec<&IntMatrix> = actions.iter().collect();
            (gens, IntMatrix::block_diag(&refs), total)
        }
    })
}

impl FinMod {
    /// Validates `U Λ ⊆ Λ` and `U^p ≡ I` modulo `Λ`.
    pub fn new(p: usize, lambda: Lattice, action: IntMatrix) -> Result<FinMod> {
        crate::check_prime(p)?;
        let r = lambda.ambient();
        if action.rows() != r || action.cols() != r {
            return Err(Error::InvalidModule(format!(
                "action is {}x{}, ambient rank is {r}",
                action.rows(),
                action.cols()
            )));
        }
        if !lambda.contains_lattice(&lambda.image(&action)) {
            return Err(Error::AutomorphismViolation("action does not preserve the relation lattice".into()));
        }
        let up = action.pow(p).sub(&IntMatrix::identity(r));
        if !up.col_vecs().iter().all(|c| lambda.contains(c)) {
            return Err(Error::AutomorphismViolation(format!("action does not have order dividing {p}")));
        }
        Ok(FinMod { p, lambda, action, spec: None })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.lambda.ambient()
    }

    pub fn relations(&self) -> &Lattice {
        &self.lambda
    }

    pub fn action(&self) -> &IntMatrix {
        &self.action
    }

    pub fn spec(&self) -> Option<&ModSpec> {
        self.spec.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_full_rank()
    }

    pub fn order(&self) -> Option<BigInt> {
        self.lambda.index()
    }

    /// `|M|` as a machine integer; errors for infinite or huge modules.
    pub fn size(&self) -> Result<usize> {
        self.order()
            .ok_or(Error::InfiniteModule)?
            .to_usize()
            .ok_or_else(|| Error::InvalidModule("module too large to enumerate".into()))
    }

    pub fn check_element(&self, v: &[BigInt]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::BadElement(format!("length {} in rank {}", v.len(), self.rank())));
        }
        Ok(())
    }

    pub fn zero_element(&self) -> IntVec {
        vec![BigInt::zero(); self.rank()]
    }

    pub fn reduce(&self, v: &[BigInt]) -> IntVec {
        self.lambda.reduce(v)
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> IntVec {
        self.reduce(&crate::intlinalg::vec_add(a, b))
    }

    pub fn sub(&self, a: &[BigInt], b: &[BigInt]) -> IntVec {
        self.reduce(&crate::intlinalg::vec_sub(a, b))
    }

    /// `alpha * v`.
    pub fn apply(&self, v: &[BigInt]) -> IntVec {
        self.reduce(&self.action.mul_vec(v))
    }

    pub fn is_zero(&self, v: &[BigInt]) -> bool {
        self.lambda.contains(v)
    }

    /// 1 when `U ≡ I` modulo `Λ`, otherwise `p`.
    pub fn action_order(&self) -> usize {
        let d = self.action.sub(&IntMatrix::identity(self.rank()));
        if d.col_vecs().iter().all(|c| self.lambda.contains(c)) {
            1
        } else {
            self.p
        }
    }

    /// Pivot entries of the relation lattice; element coordinates range over `[0, d_i)`.
    fn radices(&self) -> Result<Vec<usize>> {
        if !self.is_finite() {
            return Err(Error::InfiniteModule);
        }
        self.lambda
            .vectors()
            .iter()
            .enumerate()
            .map(|(i, v)| v[i].to_usize().ok_or_else(|| Error::InvalidModule("module too large".into())))
            .collect()
    }

    /// All elements in mixed-radix order (first coordinate most significant), `0` first.
    pub fn enumerate(&self) -> Result<Vec<IntVec>> {
        let rad = self.radices()?;
        let n = self.size()?;
        let mut out = Vec::with_capacity(n);
        let mut digits = vec![0usize; rad.len()];
        for _ in 0..n {
            out.push(digits.iter().map(|&d| BigInt::from(d)).collect());
            for i in (0..rad.len()).rev() {
                digits[i] += 1;
                if digits[i] < rad[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(out)
    }

    /// Position of an element in [`FinMod::enumerate`] order.
    pub fn index_of(&self, v: &[BigInt]) -> Result<usize> {
        self.check_element(v)?;
        let rad = self.radices()?;
        let c = self.reduce(v);
        let mut idx = 0usize;
        for (x, r) in c.iter().zip(rad) {
            idx = idx * r + x.to_usize().expect("reduced coordinate");
        }
        Ok(idx)
    }

    /// Permutation of element indices induced by `alpha`.
    pub fn action_permutation(&self) -> Result<Vec<usize>> {
        self.enumerate()?
            .iter()
            .map(|x| self.index_of(&self.apply(x)))
            .collect()
    }

    /// Orbits of `alpha` on element indices, each listed as `x, αx, α²x, ...`.
    pub fn orbits(&self) -> Result<Vec<Vec<usize>>> {
        let perm = self.action_permutation()?;
        let mut seen = vec![false; perm.len()];
        let mut out = Vec::new();
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut x = perm[start];
            while x != start {
                seen[x] = true;
                orbit.push(x);
                x = perm[x];
            }
            out.push(orbit);
        }
        Ok(out)
    }

    fn t_matrix(&self) -> IntMatrix {
        self.action.sub(&IntMatrix::identity(self.rank()))
    }

    fn s_matrix(&self) -> IntMatrix {
        let r = self.rank();
        let mut acc = IntMatrix::zeros(r, r);
        let mut pw = IntMatrix::identity(r);
        for _ in 0..self.p {
            acc = acc.add(&pw);
            pw = pw.dot(&self.action);
        }
        acc
    }

    /// `Λ + image(m)`: the subgroup generated by the columns of `m`.
    fn span_of(&self, m: &IntMatrix) -> Lattice {
        let mut gens = self.lambda.vectors().to_vec();
        gens.extend(m.col_vecs());
        Lattice::from_generators(self.rank(), gens)
    }

    /// Subgroup `tM`.
    pub fn t_image(&self) -> Lattice {
        self.span_of(&self.t_matrix())
    }

    /// Subgroup `sM`.
    pub fn s_image(&self) -> Lattice {
        self.span_of(&self.s_matrix())
    }

    /// Fixed submodule `{x : αx = x}`.
    pub fn fixed_submodule(&self) -> Lattice {
        self.lambda.preimage(&self.t_matrix())
    }

    /// `{x : sx = 0}`.
    pub fn s_kernel(&self) -> Lattice {
        self.lambda.preimage(&self.s_matrix())
    }

    /// `t L` for a subgroup `L`.
    pub fn t_times(&self, sub: &Lattice) -> Lattice {
        let mut gens = self.lambda.vectors().to_vec();
        let t = self.t_matrix();
        gens.extend(sub.vectors().iter().map(|v| t.mul_vec(v)));
        Lattice::from_generators(self.rank(), gens)
    }

    /// `k L` for a subgroup `L`.
    pub fn scale_sub(&self, sub: &Lattice, k: &BigInt) -> Lattice {
        let mut gens = self.lambda.vectors().to_vec();
        gens.extend(sub.vectors().iter().map(|v| v.iter().map(|x| x * k).collect()));
        Lattice::from_generators(self.rank(), gens)
    }

    /// Number of elements of the subgroup `L ⊇ Λ`.
    pub fn subgroup_order(&self, sub: &Lattice) -> Result<BigInt> {
        let (Some(a), Some(b)) = (self.lambda.index(), sub.index()) else {
            return Err(Error::InfiniteModule);
        };
        Ok(a / b)
    }

    pub fn is_submodule(&self, sub: &Lattice) -> bool {
        sub.ambient() == self.rank()
            && sub.contains_lattice(&self.lambda)
            && sub.contains_lattice(&sub.image(&self.action))
    }

    /// Smallest submodule containing `gens`.
    pub fn submodule_generated(&self, gens: &[IntVec]) -> Result<Lattice> {
        let mut all = self.lambda.vectors().to_vec();
        for g in gens {
            self.check_element(g)?;
            let mut x = g.clone();
            for _ in 0..self.p {
                all.push(x.clone());
                x = self.action.mul_vec(&x);
            }
        }
        Ok(Lattice::from_generators(self.rank(), all))
    }

    /// The submodule `L` as a module in its own coordinates, with the inclusion matrix.
    pub fn embed(&self, sub: &Lattice) -> Result<Embedded> {
        if !self.is_submodule(sub) {
            return Err(Error::Precondition("lattice is not a submodule".into()));
        }
        let lam = sub.coordinate_matrix(&self.lambda)?;
        let cols = sub
            .vectors()
            .iter()
            .map(|v| sub.coordinates(&self.action.mul_vec(v)).ok_or(Error::NotContained))
            .collect::<Result<Vec<_>>>()?;
        let action = IntMatrix::from_cols(&cols, sub.rank());
        let module = FinMod::new(self.p, Lattice::from_columns(&lam), action)?;
        Ok(Embedded { module, inclusion: sub.basis(), lattice: sub.clone() })
    }

    /// `M / L` for a submodule `L`.
    pub fn quotient(&self, sub: &Lattice) -> Result<FinMod> {
        if !self.is_submodule(sub) {
            return Err(Error::Precondition("lattice is not a submodule".into()));
        }
        FinMod::new(self.p, sub.clone(), self.action.clone())
    }

    /// Every submodule, found by closing under "add one generator". Finite modules only.
    pub fn all_submodules(&self) -> Result<Vec<Lattice>> {
        let elems = self.enumerate()?;
        let start = self.lambda.clone();
        let mut seen: HashSet<Lattice> = HashSet::from([start.clone()]);
        let mut out = vec![start.clone()];
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for x in &elems {
                if cur.contains(x) {
                    continue;
                }
                let mut gens = cur.vectors().to_vec();
                let mut y = x.clone();
                for _ in 0..self.p {
                    gens.push(y.clone());
                    y = self.action.mul_vec(&y);
                }
                let next = Lattice::from_generators(self.rank(), gens);
                if seen.insert(next.clone()) {
                    out.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(out)
    }

    /// Elements of a subgroup, as indices into [`FinMod::enumerate`].
    pub fn subgroup_indices(&self, sub: &Lattice) -> Result<Vec<usize>> {
        Ok(self
            .enumerate()?
            .iter()
            .enumerate()
            .filter(|(_, x)| sub.contains(x))
            .map(|(i, _)| i)
            .collect())
    }

    pub fn format_element(&self, v: &[BigInt]) -> String {
        let c = self.reduce(v);
        let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        format!("({})", s.join(","))
    }

    /// Direct sum with block-diagonal relations and action.
    pub fn direct_sum(&self, other: &FinMod) -> Result<FinMod> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let (r1, r2) = (self.rank(), other.rank());
        let mut gens = Vec::new();
        for v in self.lambda.vectors() {
            let mut w = v.clone();
            w.extend(std::iter::repeat_n(BigInt::zero(), r2));
            gens.push(w);
        }
        for v in other.lambda.vectors() {
            let mut w = vec![BigInt::zero(); r1];
            w.extend(v.iter().cloned());
            gens.push(w);
        }
        let lambda = Lattice::from_generators(r1 + r2, gens);
        let action = IntMatrix::block_diag(&[&self.action, &other.action]);
        let mut m = FinMod::new(self.p, lambda, action)?;
        if let (Some(a), Some(b)) = (&self.spec, &other.spec) {
            m.spec = Some(ModSpec::Sum(vec![a.clone(), b.clone()]));
        }
        Ok(m)
    }
}

/// A submodule presented in its own coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedded {
    pub module: FinMod,
    /// Parent coordinates of the submodule's basis vectors (columns).
    pub inclusion: IntMatrix,
    pub lattice: Lattice,
}

impl Embedded {
    pub fn include(&self, v: &[BigInt]) -> IntVec {
        self.inclusion.mul_vec(v)
    }
}

/// Finite building blocks with `1 < |leaf| <= cap` for the prime `p`.
pub fn leaf_catalogue(p: usize, cap: u64) -> Vec<ModSpec> {
    let mut out = Vec::new();
    for n in 2..=cap {
        out.push(ModSpec::TrivCyclic(n));
    }
    for n in 3..=cap {
        for u in 2..n {
            let (nn, uu) = (BigInt::from(n), BigInt::from(u));
            if uu.gcd(&nn).is_one() && uu.modpow(&BigInt::from(p), &nn).is_one() {
                out.push(ModSpec::Twisted { n, u });
            }
        }
    }
    for q in 2..=cap {
        if !crate::is_prime(q) {
            continue;
        }
        let mut k = 1u32;
        while q.checked_pow(k * p as u32).is_some_and(|o| o <= cap) {
            out.push(ModSpec::CyclicR { q, k });
            k += 1;
        }
    }
    out
}

/// Every direct sum of catalogue leaves (as a multiset) with order at most `cap`.
pub fn small_specs(p: usize, cap: u64) -> Vec<ModSpec> {
    let leaves: Vec<(ModSpec, u64)> = leaf_catalogue(p, cap)
        .into_iter()
        .map(|l| {
            let o = l.order(p).and_then(|o| o.to_u64()).expect("finite leaf");
            (l, o)
        })
        .collect();
    let mut out = Vec::new();
    fn go(leaves: &[(ModSpec, u64)], from: usize, budget: u64, cur: &mut Vec<ModSpec>, out: &mut Vec<ModSpec>) {
        if !cur.is_empty() {
            out.push(if cur.len() == 1 { cur[0].clone() } else { ModSpec::Sum(cur.clone()) });
        }
        for i in from..leaves.len() {
            let (l, o) = &leaves[i];
            if *o <= budget {
                cur.push(l.clone());
                go(leaves, i, budget / o, cur, out);
                cur.pop();
            }
        }
    }
    go(&leaves, 0, cap, &mut Vec::new(), &mut out);
    out
}

/// Random finite module with `|M| <= cap`: a sum of up to three catalogue leaves,
/// optionally divided by the submodule generated by a random element.
pub fn random_module<G: Rng>(rng: &mut G, p: usize, cap: u64) -> Result<FinMod> {
    let leaves: Vec<(ModSpec, u64)> = leaf_catalogue(p, cap)
        .into_iter()
        .map(|l| {
            let o = l.order(p).and_then(|o| o.to_u64()).expect("finite leaf");
            (l, o)
        })
        .collect();
    let count = rng.gen_range(1..=3);
    let mut budget = cap;
    let mut parts = Vec::new();
    for _ in 0..count {
        let fits: Vec<&(ModSpec, u64)> = leaves.iter().filter(|(_, o)| *o <= budget).collect();
        let Some((l, o)) = fits.choose(rng) else { break };
        parts.push(l.clone());
        budget /= o;
    }
    let spec = if parts.len() == 1 { parts.pop().expect("one") } else { ModSpec::Sum(parts) };
    let m = build(&spec, p)?;
    if rng.gen_bool(0.3) && m.rank() > 0 {
        let elems = m.enumerate()?;
        let x = elems.choose(rng).expect("nonempty").clone();
        if !is_zero_vec(&x) {
            let sub = m.submodule_generated(&[x])?;
            return m.quotient(&sub);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::vec_from_i64;

    #[test]
    fn cyclic_r_order_and_shift() {
        let m = build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap();
        assert_eq!(m.size().unwrap(), 4);
        assert_eq!(m.apply(&vec_from_i64(&[1, 0])), vec_from_i64(&[0, 1]));
        assert_eq!(m.action_order(), 2);
    }

    #[test]
    fn trivial_leaf_and_sum_orders() {
        let m = build(&ModSpec::TrivCyclic(5), 2).unwrap();
        assert_eq!(m.size().unwrap(), 5);
        assert!(m.action().is_identity());
        let s = ModSpec::parse("triv(2) + triv(3)").unwrap();
        assert_eq!(build(&s, 2).unwrap().size().unwrap(), 6);
    }

    #[test]
    fn enumeration() {
        let m = build(&ModSpec::TrivCyclic(3), 2).unwrap();
        assert_eq!(m.enumerate().unwrap().len(), 3);
        let r2 = build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap();
        let e = r2.enumerate().unwrap();
        assert_eq!(e, vec![vec_from_i64(&[0, 0]), vec_from_i64(&[0, 1]), vec_from_i64(&[1, 0]), vec_from_i64(&[1, 1])]);
        for (i, x) in e.iter().enumerate() {
            assert_eq!(r2.index_of(x).unwrap(), i);
        }
        assert_eq!(build(&ModSpec::FreeR(1), 2).unwrap().enumerate(), Err(Error::InfiniteModule));
    }

    #[test]
    fn orbits_of_twisted_z5() {
        let m = build(&ModSpec::Twisted { n: 5, u: 4 }, 2).unwrap();
        let o = m.orbits().unwrap();
        assert_eq!(o, vec![vec![0], vec![1, 4], vec![2, 3]]);
    }

    #[test]
    fn orbits_of_r_mod_3() {
        let m = build(&ModSpec::CyclicR { q: 3, k: 1 }, 2).unwrap();
        let o = m.orbits().unwrap();
        let fixed: Vec<_> = o.iter().filter(|c| c.len() == 1).collect();
        assert_eq!(fixed.len(), 3);
        assert_eq!(o.len() - fixed.len(), 3);
        assert_eq!(m.subgroup_order(&m.fixed_submodule()).unwrap(), BigInt::from(3));
    }

    #[test]
    fn t_image_of_r_mod_4() {
        let m = build(&ModSpec::CyclicR { q: 2, k: 2 }, 2).unwrap();
        let tm = m.t_image();
        assert_eq!(m.subgroup_order(&tm).unwrap(), BigInt::from(4));
        let two_tm = m.scale_sub(&tm, &BigInt::from(2));
        assert_eq!(m.subgroup_order(&two_tm).unwrap(), BigInt::from(2));
        let triv = build(&ModSpec::TrivCyclic(6), 2).unwrap();
        assert_eq!(triv.subgroup_order(&triv.t_image()).unwrap(), BigInt::one());
    }

    #[test]
    fn s_kernel_is_t_image_when_q_differs() {
        for (q, p) in [(3u64, 2usize), (2, 3), (5, 2)] {
            let m = build(&ModSpec::CyclicR { q, k: 1 }, p).unwrap();
            assert_eq!(m.s_kernel(), m.t_image());
        }
    }

    #[test]
    fn generated_submodules() {
        let m = build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap();
        let z = m.submodule_generated(&[m.zero_element()]).unwrap();
        assert_eq!(&z, m.relations());
        let f = m.submodule_generated(&[vec_from_i64(&[1, 1])]).unwrap();
        assert_eq!(m.subgroup_order(&f).unwrap(), BigInt::from(2));
        assert_eq!(f, m.fixed_submodule());
        let all = m.submodule_generated(&m.enumerate().unwrap()).unwrap();
        assert_eq!(all, Lattice::full(2));
        let emb = m.embed(&f).unwrap();
        assert_eq!(emb.module.size().unwrap(), 2);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let s = ModSpec::parse("triv(2)+cyclicR(3,1) + cyclic(5,4) + freeR(1) + trivfree(2)").unwrap();
        assert_eq!(ModSpec::parse(&s.to_string()).unwrap(), s);
        for bad in ["", "triv", "triv(0)", "cyclicR(4,1)", "foo(2)", "triv(2", "triv(a)"] {
            assert!(matches!(ModSpec::parse(bad), Err(Error::Parse(_))), "{bad}");
        }
        assert!(build(&ModSpec::Twisted { n: 5, u: 2 }, 2).is_err());
    }

    #[test]
    fn submodule_lattice_of_r_mod_2() {
        let m = build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap();
        // 0, the fixed line, and M.
        assert_eq!(m.all_submodules().unwrap().len(), 3);
    }
}
