//! The presentation `0 -> N_M -> ZM -> M -> 0` and invariant bases of `N_M`.
//!
//! `ZM` has one coordinate per element of `M`, in [`FinMod::enumerate`] order,
//! so `0̂` is coordinate 0. Invariant bases come from three sources:
//! explicit formulas for the building blocks and their direct sums, a greedy
//! orbit-peeling search on an arbitrary lattice with action, and the same
//! search after adjoining free summands `R^k`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::{kernel_basis, snf, solve_integer, IntMatrix, IntVec, Lattice};
use crate::zmod::{build, FinMod, ModSpec};

/// A lattice in `Z^n` together with an automorphism of `Z^n` preserving it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModLattice {
    pub p: usize,
    pub lattice: Lattice,
    pub action: IntMatrix,
}

impl ModLattice {
    pub fn new(p: usize, lattice: Lattice, action: IntMatrix) -> Result<Self> {
        let n = lattice.ambient();
        if action.rows() != n || action.cols() != n {
            return Err(Error::DimensionMismatch {
                op: "lattice action",
                left: (action.rows(), action.cols()),
                right: (n, n),
            });
        }
        let ml = ModLattice { p, lattice, action };
        let a = ml.coordinate_action()?;
        if !a.pow(p).is_identity() {
            return Err(Error::AutomorphismViolation(format!("action on the lattice has order not dividing {p}")));
        }
        Ok(ml)
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    /// Matrix of the action in the lattice's own basis.
    pub fn coordinate_action(&self) -> Result<IntMatrix> {
        let cols = self
            .lattice
            .vectors()
            .iter()
            .map(|v| {
                self.lattice.coordinates(&self.action.mul_vec(v)).ok_or_else(|| {
                    Error::AutomorphismViolation("action does not preserve the lattice".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix::from_cols(&cols, self.rank()))
    }

    fn t_matrix(&self) -> IntMatrix {
        self.action.sub(&IntMatrix::identity(self.lattice.ambient()))
    }

    fn s_matrix(&self) -> IntMatrix {
        let n = self.lattice.ambient();
        let mut acc = IntMatrix::zeros(n, n);
        let mut pw = IntMatrix::identity(n);
        for _ in 0..self.p {
            acc = acc.add(&pw);
            pw = pw.dot(&self.action);
        }
        acc
    }

    /// `tN`.
    pub fn t_lattice(&self) -> Lattice {
        self.lattice.image(&self.t_matrix())
    }

    /// `ker(s) ∩ N`.
    pub fn s_kernel(&self) -> Lattice {
        self.kernel_of(&self.s_matrix())
    }

    /// `N^alpha`, the fixed vectors of `N`.
    pub fn fixed_lattice(&self) -> Lattice {
        self.kernel_of(&self.t_matrix())
    }

    fn kernel_of(&self, m: &IntMatrix) -> Lattice {
        let b = self.lattice.basis();
        let k = kernel_basis(&m.dot(&b));
        let gens = k.vectors().iter().map(|c| b.mul_vec(c)).collect();
        Lattice::from_generators(self.lattice.ambient(), gens)
    }

    /// `ker(s) ∩ N = tN`.
    pub fn is_noncyclotomic(&self) -> bool {
        self.s_kernel() == self.t_lattice()
    }

    /// `N ⊕ R^k`: `k p` new coordinates carrying cyclic shifts.
    pub fn stabilize(&self, k: usize) -> ModLattice {
        let n = self.lattice.ambient();
        let p = self.p;
        let shift = IntMatrix::permutation(&(0..p).map(|i| (i + 1) % p).collect::<Vec<_>>());
        let mut blocks: Vec<&IntMatrix> = vec![&self.action];
        for _ in 0..k {
            blocks.push(&shift);
        }
        let action = IntMatrix::block_diag(&blocks);
        let total = n + k * p;
        let mut gens: Vec<IntVec> = self
            .lattice
            .vectors()
            .iter()
            .map(|v| {
                let mut w = v.clone();
                w.resize(total, BigInt::zero());
                w
            })
            .collect();
        for i in n..total {
            let mut w = vec![BigInt::zero(); total];
            w[i] = BigInt::one();
            gens.push(w);
        }
        ModLattice { p, lattice: Lattice::from_generators(total, gens), action }
    }
}

/// A basis made of free `alpha`-orbits and fixed vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantBasis {
    pub p: usize,
    pub ambient: usize,
    /// Each block is `v, αv, ..., α^(p-1) v`.
    pub orbits: Vec<Vec<IntVec>>,
    pub fixed: Vec<IntVec>,
}

impl InvariantBasis {
    pub fn rank(&self) -> usize {
        self.orbits.len() * self.p + self.fixed.len()
    }

    pub fn vectors(&self) -> Vec<IntVec> {
        self.orbits.iter().flatten().chain(&self.fixed).cloned().collect()
    }

    pub fn span(&self) -> Lattice {
        Lattice::from_generators(self.ambient, self.vectors())
    }

    /// Checks the orbit and fixed-vector structure and that the vectors form a Z-basis of `target`.
    pub fn verify(&self, target: &ModLattice) -> Result<()> {
        fn bad(m: String) -> Result<()> {
            Err(Error::InvalidBasis(m))
        }
        if self.ambient != target.lattice.ambient() || self.p != target.p {
            return bad("ambient or prime mismatch".into());
        }
        let u = &target.action;
        for (j, block) in self.orbits.iter().enumerate() {
            if block.len() != self.p {
                return bad(format!("orbit {j} has {} vectors", block.len()));
            }
            for i in 0..self.p {
                if u.mul_vec(&block[i]) != block[(i + 1) % self.p] {
                    return bad(format!("orbit {j} is not cycled by the action at position {i}"));
                }
            }
        }
        for (j, f) in self.fixed.iter().enumerate() {
            if &u.mul_vec(f) != f {
                return bad(format!("fixed vector {j} is moved by the action"));
            }
        }
        if self.rank() != target.rank() {
            return bad(format!("{} vectors for a lattice of rank {}", self.rank(), target.rank()));
        }
        let coords = self
            .vectors()
            .iter()
            .map(|v| target.lattice.coordinates(v).ok_or(Error::NotContained))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::InvalidBasis("a vector lies outside the lattice".into()))?;
        let c = IntMatrix::from_cols(&coords, target.rank());
        if !c.det().abs().is_one() {
            return bad("vectors do not span the lattice".into());
        }
        Ok(())
    }

    /// The same basis with `k` extra standard free orbits on new trailing coordinates.
    pub fn stabilize(&self, k: usize) -> InvariantBasis {
        let total = self.ambient + k * self.p;
        let pad = |v: &IntVec| {
            let mut w = v.clone();
            w.resize(total, BigInt::zero());
            w
        };
        let mut orbits: Vec<Vec<IntVec>> = self.orbits.iter().map(|b| b.iter().map(pad).collect()).collect();
        for j in 0..k {
            orbits.push(
                (0..self.p)
                    .map(|i| {
                        let mut w = vec![BigInt::zero(); total];
                        w[self.ambient + j * self.p + i] = BigInt::one();
                        w
                    })
                    .collect(),
            );
        }
        InvariantBasis { p: self.p, ambient: total, orbits, fixed: self.fixed.iter().map(pad).collect() }
    }
}

/// `0 -> N_M -> ZM -> M -> 0` for a finite module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugPresentation {
    pub module: FinMod,
    pub elements: Vec<IntVec>,
    /// `r x |M|`; column `j` is element `j`.
    pub pi: IntMatrix,
    pub n: Lattice,
    /// `perm[j]` is the index of `alpha * elements[j]`.
    pub perm: Vec<usize>,
    pub action: IntMatrix,
}

pub fn build_aug(m: &FinMod) -> Result<AugPresentation> {
    let elements = m.enumerate()?;
    let pi = IntMatrix::from_cols(&elements, m.rank());
    let n = m.relations().preimage(&pi);
    let perm = m.action_permutation()?;
    let action = IntMatrix::permutation(&perm);
    Ok(AugPresentation { module: m.clone(), elements, pi, n, perm, action })
}

impl AugPresentation {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn p(&self) -> usize {
        self.module.p()
    }

    pub fn mod_lattice(&self) -> ModLattice {
        ModLattice { p: self.p(), lattice: self.n.clone(), action: self.action.clone() }
    }

    /// `x̂` for element index `i`.
    pub fn hat(&self, i: usize) -> IntVec {
        let mut v = vec![BigInt::zero(); self.size()];
        v[i] = BigInt::one();
        v
    }

    /// `π_M(ξ)` as a canonical element.
    pub fn project(&self, xi: &[BigInt]) -> IntVec {
        self.module.reduce(&self.pi.mul_vec(xi))
    }

    /// `Ñ_M`: vectors of `N_M` with zero `0̂`-coefficient.
    pub fn tilde(&self) -> Lattice {
        let n = self.size();
        let mut gens = vec![];
        // N = Z0̂ ⊕ Ñ, so Ñ is the projection of N killing coordinate 0.
        for v in self.n.vectors() {
            let mut w = v.clone();
            w[0] = BigInt::zero();
            gens.push(w);
        }
        Lattice::from_generators(n, gens)
    }
}

/// All-fixed basis `{0̂} ∪ basis(Ñ_M)` of `N_M` for a module with trivial action.
pub fn trivial_basis(pres: &AugPresentation) -> Result<InvariantBasis> {
    if pres.module.action_order() != 1 {
        return Err(Error::Precondition("module action is not trivial".into()));
    }
    let mut fixed = vec![pres.hat(0)];
    fixed.extend(pres.tilde().vectors().iter().cloned());
    let b = InvariantBasis { p: pres.p(), ambient: pres.size(), orbits: vec![], fixed };
    b.verify(&pres.mod_lattice())?;
    Ok(b)
}

/// Explicit basis of `N_M` for `M = R/(q^k)`: the vectors `ξ_x = x̂ - Σ x_i ê_i`
/// for `x` outside the standard basis, and the orbit `q^k ê_i`.
pub fn basis_r_mod_qk(q: u64, k: u32, p: usize) -> Result<(AugPresentation, InvariantBasis)> {
    let m = build(&ModSpec::CyclicR { q, k }, p)?;
    let pres = build_aug(&m)?;
    let unit_idx: Vec<usize> = (0..p)
        .map(|i| {
            let mut e = vec![BigInt::zero(); p];
            e[i] = BigInt::one();
            m.index_of(&e)
        })
        .collect::<Result<_>>()?;
    let xi = |x: usize| {
        let mut v = pres.hat(x);
        for (i, c) in pres.elements[x].iter().enumerate() {
            v[unit_idx[i]] -= c;
        }
        v
    };
    let mut orbits = Vec::new();
    let mut fixed = Vec::new();
    for orbit in m.orbits()? {
        if orbit.iter().any(|x| unit_idx.contains(x)) {
            continue;
        }
        if orbit.len() == 1 {
            fixed.push(xi(orbit[0]));
        } else {
            orbits.push(orbit.iter().map(|&x| xi(x)).collect());
        }
    }
    let qk = num_traits::pow(BigInt::from(q), k as usize);
    orbits.push(
        unit_idx
            .iter()
            .map(|&i| {
                let mut v = vec![BigInt::zero(); pres.size()];
                v[i] = qk.clone();
                v
            })
            .collect(),
    );
    let b = InvariantBasis { p, ambient: pres.size(), orbits, fixed };
    b.verify(&pres.mod_lattice())?;
    Ok((pres, b))
}

/// The vectors `ξ_x` for `x` in a finite box of `R` (coordinates in `[-radius, radius]`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowedBasis {
    pub window: Vec<IntVec>,
    /// Kernel of `Z(window) -> R`, with the induced permutation action.
    pub kernel: ModLattice,
    pub basis: InvariantBasis,
}

pub fn windowed_free_basis(p: usize, radius: i64) -> Result<WindowedBasis> {
    crate::check_prime(p)?;
    if radius < 1 {
        return Err(Error::Precondition("window radius must be at least 1".into()));
    }
    let side = (2 * radius + 1) as usize;
    let count = side.pow(p as u32);
    let window: Vec<IntVec> = (0..count)
        .map(|mut idx| {
            let mut v = vec![BigInt::zero(); p];
            for i in (0..p).rev() {
                v[i] = BigInt::from((idx % side) as i64 - radius);
                idx /= side;
            }
            v
        })
        .collect();
    let pos = |v: &IntVec| window.iter().position(|w| w == v).expect("window is closed under the shift");
    let rotate = |v: &IntVec| (0..p).map(|i| v[(i + p - 1) % p].clone()).collect::<IntVec>();
    let perm: Vec<usize> = window.iter().map(|v| pos(&rotate(v))).collect();
    let action = IntMatrix::permutation(&perm);
    let pi = IntMatrix::from_cols(&window, p);
    let kernel = ModLattice { p, lattice: kernel_basis(&pi), action };
    let unit: Vec<usize> = (0..p)
        .map(|i| {
            let mut e = vec![BigInt::zero(); p];
            e[i] = BigInt::one();
            pos(&e)
        })
        .collect();
    let xi = |x: usize| {
        let mut v = vec![BigInt::zero(); count];
        v[x] = BigInt::one();
        for (i, c) in window[x].iter().enumerate() {
            v[unit[i]] -= c;
        }
        v
    };
    let mut seen = vec![false; count];
    let (mut orbits, mut fixed) = (Vec::new(), Vec::new());
    for start in 0..count {
        if seen[start] || unit.contains(&start) {
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
        if orbit.len() == 1 {
            fixed.push(xi(start));
        } else {
            orbits.push(orbit.into_iter().map(xi).collect());
        }
    }
    let basis = InvariantBasis { p, ambient: count, orbits, fixed };
    basis.verify(&kernel)?;
    Ok(WindowedBasis { window, kernel, basis })
}

/// Invariant basis of `Ñ_M` obtained from one of `N_M`, swapping `0̂` into the
/// basis first when it is not already a member.
pub fn tilde_basis(pres: &AugPresentation, b: &InvariantBasis) -> Result<InvariantBasis> {
    let zero_hat = pres.hat(0);
    let mut fixed = b.fixed.clone();
    if let Some(i) = fixed.iter().position(|v| v == &zero_hat) {
        fixed.remove(i);
    } else {
        let vecs = b.vectors();
        let m = IntMatrix::from_cols(&vecs, b.ambient);
        let c = solve_integer(&m, &zero_hat).ok_or_else(|| Error::InvalidBasis("0̂ is not in the span".into()))?;
        let off = b.orbits.len() * b.p;
        let i = (0..fixed.len())
            .find(|&i| c[off + i].abs().is_one())
            .ok_or_else(|| Error::SearchExhausted("no fixed vector can be exchanged for 0̂".into()))?;
        fixed.remove(i);
    }
    let kill0 = |v: &IntVec| {
        let mut w = v.clone();
        w[0] = BigInt::zero();
        w
    };
    let out = InvariantBasis {
        p: b.p,
        ambient: b.ambient,
        orbits: b.orbits.iter().map(|blk| blk.iter().map(kill0).collect()).collect(),
        fixed: fixed.iter().map(kill0).collect(),
    };
    let target = ModLattice { p: pres.p(), lattice: pres.tilde(), action: pres.action.clone() };
    out.verify(&target)?;
    Ok(out)
}

/// The four pieces of `N_{M1 ⊕ M2} = Z0̂ ⊕ Ñ_{M1} ⊕ Ñ_{M2} ⊕ N_3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectSumBasis {
    pub presentation: AugPresentation,
    pub zero_hat: IntVec,
    pub tilde1: InvariantBasis,
    pub tilde2: InvariantBasis,
    /// `ξ_x = x̂ - x̂_1 - x̂_2` for `x = (x_1, x_2)` with both parts nonzero.
    pub n3: InvariantBasis,
    /// Element index of each `x` labelling a vector of `n3`, in block order.
    pub n3_labels: Vec<usize>,
    pub basis: InvariantBasis,
}

pub fn assemble_direct_sum(
    p1: &AugPresentation,
    p2: &AugPresentation,
    b1: &InvariantBasis,
    b2: &InvariantBasis,
) -> Result<DirectSumBasis> {
    if p1.p() != p2.p() {
        return Err(Error::PrimeMismatch(p1.p(), p2.p()));
    }
    let p = p1.p();
    let sum = p1.module.direct_sum(&p2.module)?;
    let pres = build_aug(&sum)?;
    let n = pres.size();
    let (r1, r2) = (p1.module.rank(), p2.module.rank());
    let pair_index = |i1: usize, i2: usize| -> Result<usize> {
        let mut v = p1.elements[i1].clone();
        v.extend(p2.elements[i2].iter().cloned());
        debug_assert_eq!(v.len(), r1 + r2);
        sum.index_of(&v)
    };
    let embed = |v: &IntVec, first: bool| -> Result<IntVec> {
        let mut w = vec![BigInt::zero(); n];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let j = if first { pair_index(i, 0)? } else { pair_index(0, i)? };
            w[j] += c;
        }
        Ok(w)
    };
    let embed_basis = |b: &InvariantBasis, first: bool| -> Result<InvariantBasis> {
        Ok(InvariantBasis {
            p,
            ambient: n,
            orbits: b
                .orbits
                .iter()
                .map(|blk| blk.iter().map(|v| embed(v, first)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
            fixed: b.fixed.iter().map(|v| embed(v, first)).collect::<Result<_>>()?,
        })
    };
    let tilde1 = embed_basis(&tilde_basis(p1, b1)?, true)?;
    let tilde2 = embed_basis(&tilde_basis(p2, b2)?, false)?;

    let (n1, n2) = (p1.size(), p2.size());
    let mut in_l = vec![false; n];
    let mut parts = vec![(0usize, 0usize); n];
    for i1 in 1..n1 {
        for i2 in 1..n2 {
            let j = pair_index(i1, i2)?;
            in_l[j] = true;
            parts[j] = (pair_index(i1, 0)?, pair_index(0, i2)?);
        }
    }
    let xi = |x: usize| {
        let mut v = pres.hat(x);
        v[parts[x].0] -= 1;
        v[parts[x].1] -= 1;
        v
    };
    let mut seen = vec![false; n];
    let mut n3 = InvariantBasis { p, ambient: n, orbits: vec![], fixed: vec![] };
    let mut labels_orbits = Vec::new();
    let mut labels_fixed = Vec::new();
    for start in 0..n {
        if !in_l[start] || seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut x = pres.perm[start];
        while x != start {
            if !in_l[x] {
                return Err(Error::Internal("L is not closed under the action".into()));
            }
            seen[x] = true;
            orbit.push(x);
            x = pres.perm[x];
        }
        if orbit.len() == 1 {
            n3.fixed.push(xi(start));
            labels_fixed.push(start);
        } else {
            n3.orbits.push(orbit.iter().map(|&x| xi(x)).collect());
            labels_orbits.extend(orbit);
        }
    }
    let zero_hat = pres.hat(0);
    let mut basis = InvariantBasis { p, ambient: n, orbits: vec![], fixed: vec![zero_hat.clone()] };
    for b in [&tilde1, &tilde2, &n3] {
        basis.orbits.extend(b.orbits.iter().cloned());
        basis.fixed.extend(b.fixed.iter().cloned());
    }
    basis.verify(&pres.mod_lattice())?;
    labels_orbits.extend(labels_fixed);
    Ok(DirectSumBasis { presentation: pres, zero_hat, tilde1, tilde2, n3, n3_labels: labels_orbits, basis })
}

/// How an invariant basis was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisMethod {
    Constructive,
    Greedy,
    Stabilized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundBasis {
    /// Number of adjoined copies of `R`.
    pub k: usize,
    pub method: BasisMethod,
    /// Basis of `N ⊕ R^k`; the extra summands occupy trailing coordinates.
    pub basis: InvariantBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub seed: u64,
    pub kmax: usize,
    /// Restarts of the greedy search per stabilization level.
    pub restarts: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { seed: 0, kmax: 3, restarts: 8 }
    }
}

/// Constructive basis following the building-block recursion of a spec tree.
pub fn constructive_basis(spec: &ModSpec, p: usize, opts: &SearchOptions) -> Result<(AugPresentation, InvariantBasis)> {
    match spec {
        ModSpec::CyclicR { q, k } => basis_r_mod_qk(*q, *k, p),
        ModSpec::TrivCyclic(_) | ModSpec::TrivFree(0) | ModSpec::FreeR(0) => {
            let pres = build_aug(&build(spec, p)?)?;
            let b = trivial_basis(&pres)?;
            Ok((pres, b))
        }
        ModSpec::TrivFree(_) | ModSpec::FreeR(_) => Err(Error::InfiniteModule),
        ModSpec::Twisted { .. } => {
            let pres = build_aug(&build(spec, p)?)?;
            let found = greedy_invariant_basis(&pres.mod_lattice(), opts)?;
            Ok((pres, found.basis))
        }
        ModSpec::Sum(parts) => {
            let Some((first, rest)) = parts.split_first() else {
                let pres = build_aug(&build(spec, p)?)?;
                let b = trivial_basis(&pres)?;
                return Ok((pres, b));
            };
            let mut acc = constructive_basis(first, p, opts)?;
            for part in rest {
                let next = constructive_basis(part, p, opts)?;
                let ds = assemble_direct_sum(&acc.0, &next.0, &acc.1, &next.1)?;
                acc = (ds.presentation, ds.basis);
            }
            Ok(acc)
        }
    }
}

/// Invariant basis of `N_M`, by the constructive route when the module came from a spec.
pub fn find_invariant_basis(pres: &AugPresentation, allow_stabilization: bool, opts: &SearchOptions) -> Result<FoundBasis> {
    let target = pres.mod_lattice();
    if let Some(spec) = pres.module.spec() {
        if let Ok((cp, b)) = constructive_basis(spec, pres.p(), opts) {
            if cp.n == pres.n && cp.action == pres.action && b.verify(&target).is_ok() {
                return Ok(FoundBasis { k: 0, method: BasisMethod::Constructive, basis: b });
            }
        }
    }
    find_invariant_basis_lattice(&target, allow_stabilization, opts)
}

/// Greedy search, then the same search on `N ⊕ R^k` for `k = 1..=kmax`.
pub fn find_invariant_basis_lattice(n: &ModLattice, allow_stabilization: bool, opts: &SearchOptions) -> Result<FoundBasis> {
    if !n.is_noncyclotomic() {
        return Err(Error::NotNonCyclotomic);
    }
    match greedy_invariant_basis(n, opts) {
        Ok(f) => return Ok(f),
        Err(Error::SearchExhausted(_)) if allow_stabilization => {}
        Err(e) => return Err(e),
    }
    for k in 1..=opts.kmax {
        let st = n.stabilize(k);
        if let Ok(mut f) = greedy_invariant_basis(&st, opts) {
            f.k = k;
            f.method = BasisMethod::Stabilized;
            return Ok(f);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no free-plus-trivial basis found for rank {} with up to {} added copies of R",
        n.rank(),
        opts.kmax
    )))
}

/// Peels free orbits one at a time, then completes with fixed vectors.
///
/// A Z-primitive submodule isomorphic to `R` is always a direct summand of a
/// lattice, so an accepted orbit never has to be revisited; the search only
/// has to find generators.
pub fn greedy_invariant_basis(n: &ModLattice, opts: &SearchOptions) -> Result<FoundBasis> {
    let p = n.p;
    let m = n.rank();
    let a_mat = n.coordinate_action()?;
    let t = a_mat.sub(&IntMatrix::identity(m));
    let fix = kernel_basis(&t);
    let f = fix.rank();
    if !(m - f).is_multiple_of(p - 1) {
        return Err(Error::SearchExhausted("rank count is not that of free plus trivial".into()));
    }
    let a = (m - f) / (p - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for attempt in 0..opts.restarts.max(1) {
        if let Some((orbits, fixed)) = greedy_attempt(&a_mat, &fix, a, p, attempt, &mut rng) {
            let b = n.lattice.basis();
            let lift = |v: &IntVec| b.mul_vec(v);
            let basis = InvariantBasis {
                p,
                ambient: n.lattice.ambient(),
                orbits: orbits.iter().map(|blk| blk.iter().map(lift).collect()).collect(),
                fixed: fixed.iter().map(lift).collect(),
            };
            basis.verify(n)?;
            return Ok(FoundBasis { k: 0, method: BasisMethod::Greedy, basis });
        }
    }
    Err(Error::SearchExhausted(format!("greedy search failed after {} restarts", opts.restarts)))
}

fn orbit_of(a: &IntMatrix, v: &IntVec, p: usize) -> Vec<IntVec> {
    let mut out = vec![v.clone()];
    for _ in 1..p {
        let next = a.mul_vec(out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

fn greedy_attempt(
    a_mat: &IntMatrix,
    fix: &Lattice,
    a: usize,
    p: usize,
    attempt: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<Vec<IntVec>>, Vec<IntVec>)> {
    let m = a_mat.rows();
    let unit = |i: usize| {
        let mut v = vec![BigInt::zero(); m];
        v[i] = BigInt::one();
        v
    };
    let mut candidates: Vec<IntVec> = (0..m).map(unit).collect();
    for i in 0..m {
        for j in i + 1..m {
            let mut d = unit(i);
            d[j] = BigInt::from(-1);
            candidates.push(d);
            let mut s = unit(i);
            s[j] = BigInt::one();
            candidates.push(s);
        }
    }
    if attempt > 0 {
        candidates.shuffle(rng);
        for _ in 0..4 * m + 16 {
            let mut v = vec![BigInt::zero(); m];
            for _ in 0..rng.gen_range(1..=3) {
                v[rng.gen_range(0..m)] += BigInt::from(rng.gen_range(-2i64..=2));
            }
            candidates.push(v);
        }
    }
    let full = Lattice::full(m);
    let mut orbits: Vec<Vec<IntVec>> = Vec::new();
    let mut gens: Vec<IntVec> = Vec::new();
    for v in &candidates {
        if orbits.len() == a {
            break;
        }
        if &a_mat.mul_vec(v) == v {
            continue;
        }
        let orbit = orbit_of(a_mat, v, p);
        let mut trial = gens.clone();
        trial.extend(orbit.iter().cloned());
        let lat = Lattice::from_generators(m, trial.clone());
        if lat.rank() != gens.len() + p || !full.is_primitive(&lat).ok()? {
            continue;
        }
        gens = trial;
        orbits.push(orbit);
    }
    if orbits.len() != a {
        return None;
    }
    // Complete with fixed vectors mapping onto a basis of Z^m / O.
    let b = m - a * p;
    let fixed = if b == 0 {
        vec![]
    } else if gens.is_empty() {
        fix.vectors().to_vec()
    } else {
        let o = IntMatrix::from_cols(&gens, m);
        let r = snf(&o);
        let qmap = IntMatrix::from_rows(r.u.row_vecs().split_off(a * p), m);
        let fb = fix.basis();
        let qf = qmap.dot(&fb);
        let mut out = Vec::with_capacity(b);
        for i in 0..b {
            let mut e = vec![BigInt::zero(); b];
            e[i] = BigInt::one();
            let x = solve_integer(&qf, &e)?;
            out.push(fb.mul_vec(&x));
        }
        out
    };
    if fixed.len() != b {
        return None;
    }
    Some((orbits, fixed))
}

/// Exact row `0 -> N_1 -> N_2 -> M -> 0` with `N_1 = N_M ⊕ R^k`, `N_2 = ZM ⊕ R^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizedPresentation {
    pub k: usize,
    pub presentation: AugPresentation,
    pub n1: FoundBasis,
    /// Basis of `N_2`: element orbits of `M` as `x̂` blocks, fixed `x̂`, plus `k` standard orbits.
    pub n2: InvariantBasis,
    /// For element `j`: `(orbit, position)` in `n2.orbits` or `(usize::MAX, i)` for `n2.fixed[i]`.
    pub cover: Vec<(usize, usize)>,
}

impl StabilizedPresentation {
    pub fn n2_lattice(&self) -> ModLattice {
        let base = ModLattice {
            p: self.presentation.p(),
            lattice: Lattice::full(self.presentation.size()),
            action: self.presentation.action.clone(),
        };
        base.stabilize(self.k)
    }

    /// Image of a vector of `N_2` in `M`.
    pub fn project(&self, v: &[BigInt]) -> IntVec {
        self.presentation.project(&v[..self.presentation.size()])
    }

    /// The `N_2` basis vector assigned to element `j`.
    pub fn cover_vector(&self, j: usize) -> &IntVec {
        let (o, i) = self.cover[j];
        if o == usize::MAX {
            &self.n2.fixed[i]
        } else {
            &self.n2.orbits[o][i]
        }
    }

    /// Adds free orbits to both `N_1` and `N_2` until `k` copies of `R` are present.
    pub fn extend_to(&mut self, k: usize) -> Result<()> {
        if k < self.k {
            return Err(Error::Precondition(format!("cannot shrink stabilization from {} to {k}", self.k)));
        }
        let extra = k - self.k;
        if extra > 0 {
            self.n1.basis = self.n1.basis.stabilize(extra);
            self.n1.k = k;
            self.n1.method = BasisMethod::Stabilized;
            self.n2 = self.n2.stabilize(extra);
            self.k = k;
        }
        self.verify()
    }

    /// Exactness, basis validity and the cover assignment, all rechecked.
    pub fn verify(&self) -> Result<()> {
        let n2 = self.n2_lattice();
        self.n2.verify(&n2)?;
        let n1 = self.presentation.mod_lattice().stabilize(self.k);
        self.n1.basis.verify(&n1)?;
        // ker(N_2 -> M) is N_M ⊕ Z^{kp}; compare with the image of N_1.
        if self.n1.basis.span() != n1.lattice {
            return Err(Error::Internal("N_1 does not map onto the kernel".into()));
        }
        for j in 0..self.presentation.size() {
            if self.project(self.cover_vector(j)) != self.presentation.elements[j] {
                return Err(Error::Internal(format!("cover fails at element {j}")));
            }
        }
        Ok(())
    }
}

pub fn stabilize_presentation(m: &FinMod, opts: &SearchOptions) -> Result<StabilizedPresentation> {
    let pres = build_aug(m)?;
    let n1 = find_invariant_basis(&pres, true, opts)?;
    let k = n1.k;
    let n = pres.size();
    let mut orbits = Vec::new();
    let mut fixed = Vec::new();
    let mut cover = vec![(0, 0); n];
    for orbit in m.orbits()? {
        if orbit.len() == 1 {
            cover[orbit[0]] = (usize::MAX, fixed.len());
            fixed.push(pres.hat(orbit[0]));
        } else {
            for (i, &x) in orbit.iter().enumerate() {
                cover[x] = (orbits.len(), i);
            }
            orbits.push(orbit.iter().map(|&x| pres.hat(x)).collect());
        }
    }
    let n2 = InvariantBasis { p: m.p(), ambient: n, orbits, fixed }.stabilize(k);
    let sp = StabilizedPresentation { k, presentation: pres, n1, n2, cover };
    sp.verify()?;
    Ok(sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::vec_from_i64;

    #[test]
    fn zero_module_presentation() {
        let pres = build_aug(&build(&ModSpec::zero(), 2).unwrap()).unwrap();
        assert_eq!(pres.size(), 1);
        assert_eq!(pres.n, Lattice::full(1));
    }

    #[test]
    fn trivial_z2_kernel() {
        let pres = build_aug(&build(&ModSpec::TrivCyclic(2), 2).unwrap()).unwrap();
        assert_eq!(pres.n, Lattice::from_generators(2, vec![vec_from_i64(&[1, 0]), vec_from_i64(&[0, 2])]));
    }

    #[test]
    fn r_mod_2_basis_shape() {
        let (pres, b) = basis_r_mod_qk(2, 1, 2).unwrap();
        assert_eq!(pres.n.rank(), 4);
        assert_eq!(b.orbits.len(), 1);
        // elements: 0=(0,0), 1=(0,1)=α, 2=(1,0)=1, 3=(1,1)
        assert_eq!(b.orbits[0], vec![vec_from_i64(&[0, 0, 2, 0]), vec_from_i64(&[0, 2, 0, 0])]);
        assert_eq!(b.fixed, vec![vec_from_i64(&[1, 0, 0, 0]), vec_from_i64(&[0, -1, -1, 1])]);
    }

    #[test]
    fn r_mod_3_basis_shape() {
        let (_, b) = basis_r_mod_qk(3, 1, 2).unwrap();
        assert_eq!(b.rank(), 9);
        assert_eq!(b.orbits.len(), 3);
        assert_eq!(b.fixed.len(), 3);
    }

    #[test]
    fn direct_sum_of_two_z2() {
        let pres = build_aug(&build(&ModSpec::TrivCyclic(2), 2).unwrap()).unwrap();
        let b = trivial_basis(&pres).unwrap();
        let ds = assemble_direct_sum(&pres, &pres, &b, &b).unwrap();
        assert_eq!(ds.n3.rank(), 1);
        assert_eq!(ds.n3.fixed.len(), 1);
        assert_eq!(ds.basis.rank(), 4);
    }

    #[test]
    fn direct_sum_with_zero() {
        let a = build_aug(&build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap()).unwrap();
        let z = build_aug(&build(&ModSpec::zero(), 2).unwrap()).unwrap();
        let (_, ba) = basis_r_mod_qk(2, 1, 2).unwrap();
        let bz = trivial_basis(&z).unwrap();
        let ds = assemble_direct_sum(&a, &z, &ba, &bz).unwrap();
        assert_eq!(ds.n3.rank(), 0);
        assert_eq!(ds.basis.rank(), 4);
    }

    #[test]
    fn twisted_z5_needs_search() {
        let m = build(&ModSpec::Twisted { n: 5, u: 4 }, 2).unwrap();
        let pres = build_aug(&m).unwrap();
        let f = find_invariant_basis(&pres, true, &SearchOptions::default()).unwrap();
        f.basis.verify(&pres.mod_lattice().stabilize(f.k)).unwrap();
    }

    #[test]
    fn windowed_free_bases() {
        for p in [2, 3] {
            let w = windowed_free_basis(p, 1).unwrap();
            assert_eq!(w.basis.rank(), w.window.len() - p);
        }
    }

    #[test]
    fn cyclotomic_lattice_is_refused() {
        let n = ModLattice::new(2, Lattice::full(1), IntMatrix::from_i64(&[&[-1]])).unwrap();
        assert!(!n.is_noncyclotomic());
        assert_eq!(find_invariant_basis_lattice(&n, true, &SearchOptions::default()), Err(Error::NotNonCyclotomic));
    }

    #[test]
    fn stabilized_presentations() {
        let m = build(&ModSpec::TrivCyclic(2), 2).unwrap();
        let sp = stabilize_presentation(&m, &SearchOptions::default()).unwrap();
        assert_eq!(sp.k, 0);
        assert_eq!(sp.n2.fixed.len(), 2);
        let m = build(&ModSpec::CyclicR { q: 2, k: 1 }, 2).unwrap();
        let sp = stabilize_presentation(&m, &SearchOptions::default()).unwrap();
        for j in 0..4 {
            assert_eq!(sp.cover_vector(j), &sp.presentation.hat(j));
        }
    }
}
