//! Properties of `N_M` and of inclusions `N_{M0} ⊆ N_M` induced by submodules.
//!
//! For `M0 ⊆ M` the sublattice `N_{M0}` is `N_M ∩ Z M0`, computed inside
//! `Z^{|M|}` so both lattices share one coordinate system. The `(tM) ∩ M0 = tM0`
//! condition is decided exactly on subgroups of `M`; the equivariant projection
//! search solves an integral Sylvester system, so an absent projection is a
//! proof of non-existence rather than a timeout.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclo_ring::RingElt;
use crate::error::{Error, Result};
use crate::intlinalg::{
    is_zero_vec, quotient_invariants, snf, solve_integer, vec_add, vec_sub, IntMatrix, IntVec, Lattice,
};
use crate::presentation::{build_aug, stabilize_presentation, AugPresentation, ModLattice, SearchOptions, StabilizedPresentation};
use crate::zmod::{random_module, FinMod};

pub fn is_noncyclotomic(n: &ModLattice) -> bool {
    n.is_noncyclotomic()
}

/// A submodule `M0` of a finite module `M` and the induced `N_{M0} ⊆ N_M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionPair {
    pub module: FinMod,
    /// `M0` as a lattice between the relations of `M` and `Z^r`.
    pub sub: Lattice,
    pub presentation: AugPresentation,
    /// Element indices of `M0` inside the enumeration of `M`.
    pub sub_indices: Vec<usize>,
    pub n0: Lattice,
}

impl InclusionPair {
    pub fn new(module: &FinMod, sub: Lattice) -> Result<Self> {
        if !module.is_submodule(&sub) {
            return Err(Error::Precondition("M0 is not a submodule of M".into()));
        }
        let presentation = build_aug(module)?;
        let n = presentation.size();
        let sub_indices: Vec<usize> = (0..n).filter(|&i| sub.contains(&presentation.elements[i])).collect();
        let coord = Lattice::from_generators(n, sub_indices.iter().map(|&i| presentation.hat(i)).collect());
        let n0 = presentation.n.intersect(&coord)?;
        Ok(InclusionPair { module: module.clone(), sub, presentation, sub_indices, n0 })
    }

    pub fn from_generators(module: &FinMod, gens: &[IntVec]) -> Result<Self> {
        let sub = module.submodule_generated(gens)?;
        Self::new(module, sub)
    }

    pub fn p(&self) -> usize {
        self.module.p()
    }

    pub fn n(&self) -> ModLattice {
        self.presentation.mod_lattice()
    }

    pub fn n0_lattice(&self) -> ModLattice {
        ModLattice { p: self.p(), lattice: self.n0.clone(), action: self.presentation.action.clone() }
    }

    pub fn in_sub(&self, idx: usize) -> bool {
        self.sub_indices.binary_search(&idx).is_ok()
    }

    /// `(ξ_0, ξ_1)` along `ZM = ZM0 ⊕ Z(M \ M0)`.
    pub fn split(&self, xi: &[BigInt]) -> (IntVec, IntVec) {
        let mut a = vec![BigInt::zero(); xi.len()];
        let mut b = vec![BigInt::zero(); xi.len()];
        for (i, c) in xi.iter().enumerate() {
            if self.in_sub(i) {
                a[i] = c.clone();
            } else {
                b[i] = c.clone();
            }
        }
        (a, b)
    }
}

/// Random submodule, generated by one or two random elements, of a random module.
pub fn random_inclusion<G: Rng>(rng: &mut G, p: usize, cap: u64) -> Result<InclusionPair> {
    let m = random_module(rng, p, cap)?;
    let elems = m.enumerate()?;
    let count = rng.gen_range(0..=2);
    let gens: Vec<IntVec> = (0..count).map(|_| elems.choose(rng).expect("nonempty").clone()).collect();
    InclusionPair::from_generators(&m, &gens)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIdentityReport {
    pub holds: bool,
    /// `(tN_M) ∩ N_{M0}`.
    pub lhs: Lattice,
    /// `tN_{M0}`.
    pub rhs: Lattice,
}

pub fn check_lemma_1_7(pair: &InclusionPair) -> Result<LatticeIdentityReport> {
    let lhs = pair.n().t_lattice().intersect(&pair.n0)?;
    let rhs = pair.n0_lattice().t_lattice();
    Ok(LatticeIdentityReport { holds: lhs == rhs, lhs, rhs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TConditionReport {
    pub holds: bool,
    /// `|(tM) ∩ M0|`.
    pub left_order: BigInt,
    /// `|tM0|`.
    pub right_order: BigInt,
    /// Some `z` with `tz ∈ M0 \ tM0` when the condition fails.
    pub witness: Option<IntVec>,
}

pub fn check_t_condition(pair: &InclusionPair) -> Result<TConditionReport> {
    let m = &pair.module;
    let left = m.t_image().intersect(&pair.sub)?;
    let right = m.t_times(&pair.sub);
    let holds = left == right;
    let witness = if holds { None } else { find_t_witness(pair, &right)? };
    Ok(TConditionReport {
        holds,
        left_order: m.subgroup_order(&left)?,
        right_order: m.subgroup_order(&right)?,
        witness,
    })
}

fn find_t_witness(pair: &InclusionPair, t_m0: &Lattice) -> Result<Option<IntVec>> {
    let m = &pair.module;
    for z in &pair.presentation.elements {
        let tz = m.sub(&m.apply(z), z);
        if pair.sub.contains(&tz) && !t_m0.contains(&tz) {
            return Ok(Some(z.clone()));
        }
    }
    Ok(None)
}

/// How a purity verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PurityRoute {
    /// `ξ` already lies in `N_0`.
    AlreadyInside,
    /// `t | λ`: `η = ξ_0 + π(ξ_1)^`.
    TDivides,
    /// `λ = λ_0 s`: `η = ξ_0 + t ŵ_0` with `tw_0 = tw`.
    SMultiple,
    /// Direct integral solve of `λη = λξ`, `η ∈ N_0`.
    Solved,
    /// `λξ ∈ N_0 \ λN_0`.
    Violation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityVerdict {
    pub pure: bool,
    pub route: PurityRoute,
    pub xi: IntVec,
    pub lambda: RingElt,
    /// `η ∈ N_0` with `λη = λξ` when pure.
    pub eta: Option<IntVec>,
}

/// Purity test for one pair `(ξ, λ)` with `λξ ∈ N_0`, building `η` as in the
/// two-case argument and falling back to an exact solve.
pub fn purity_witness(pair: &InclusionPair, xi: &IntVec, lambda: &RingElt) -> Result<PurityVerdict> {
    if lambda.p() != pair.p() {
        return Err(Error::PrimeMismatch(lambda.p(), pair.p()));
    }
    if !pair.presentation.n.contains(xi) {
        return Err(Error::Precondition("ξ is not in N_M".into()));
    }
    let lam = lambda.act(&pair.presentation.action);
    let lxi = lam.mul_vec(xi);
    if !pair.n0.contains(&lxi) {
        return Err(Error::Precondition("λξ is not in N_0".into()));
    }
    let verdict = |route, eta: Option<IntVec>| PurityVerdict {
        pure: eta.is_some(),
        route,
        xi: xi.clone(),
        lambda: lambda.clone(),
        eta,
    };
    let valid = |eta: &IntVec| pair.n0.contains(eta) && lam.mul_vec(eta) == lxi;
    if pair.n0.contains(xi) {
        return Ok(verdict(PurityRoute::AlreadyInside, Some(xi.clone())));
    }
    let (xi0, xi1) = pair.split(xi);
    let pres = &pair.presentation;
    let m = &pair.module;
    let built = if lambda.divisible_by_t() {
        let y = pres.project(&xi1);
        let eta = vec_add(&xi0, &pres.hat(m.index_of(&y)?));
        Some((PurityRoute::TDivides, eta))
    } else {
        s_multiple_eta(pair, &xi0, &xi1)?.map(|eta| (PurityRoute::SMultiple, eta))
    };
    if let Some((route, eta)) = built {
        if valid(&eta) {
            return Ok(verdict(route, Some(eta)));
        }
    }
    // λη = λξ with η = B_0 c.
    let b0 = pair.n0.basis();
    if let Some(c) = solve_integer(&lam.dot(&b0), &lxi) {
        let eta = b0.mul_vec(&c);
        debug_assert!(valid(&eta));
        return Ok(verdict(PurityRoute::Solved, Some(eta)));
    }
    Ok(verdict(PurityRoute::Violation, None))
}

/// `w` with `tw = π(ξ_1)` from per-orbit partial sums, then `w_0 ∈ M_0` with `tw_0 = tw`.
fn s_multiple_eta(pair: &InclusionPair, xi0: &IntVec, xi1: &IntVec) -> Result<Option<IntVec>> {
    let pres = &pair.presentation;
    let m = &pair.module;
    let mut w = m.zero_element();
    let mut seen = vec![false; pres.size()];
    for start in 0..pres.size() {
        if seen[start] || xi1[start].is_zero() {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut x = pres.perm[start];
        while x != start {
            seen[x] = true;
            orbit.push(x);
            x = pres.perm[x];
        }
        if orbit.len() == 1 {
            return Ok(None);
        }
        // Σ c_i α^i z = t g(α) z with g = -Σ C_i α^i, C_i = c_0 + ... + c_i.
        let z = &pres.elements[start];
        let mut partial = BigInt::zero();
        let mut az = z.clone();
        for &idx in &orbit {
            partial += &xi1[idx];
            w = m.sub(&w, &az.iter().map(|a| a * &partial).collect::<IntVec>());
            az = m.apply(&az);
        }
        if !partial.is_zero() {
            return Ok(None);
        }
    }
    let tw = m.sub(&m.apply(&w), &w);
    if !pair.sub.contains(&tw) {
        return Ok(None);
    }
    // Solve t(B_L c) ≡ tw mod Λ.
    let r = m.rank();
    let t = m.action().sub(&IntMatrix::identity(r));
    let sys = t.dot(&pair.sub.basis()).hstack(&m.relations().basis());
    let Some(sol) = solve_integer(&sys, &tw) else { return Ok(None) };
    let w0 = m.reduce(&pair.sub.basis().mul_vec(&sol[..pair.sub.rank()]));
    let aw0 = m.apply(&w0);
    let mut eta = xi0.clone();
    eta[m.index_of(&aw0)?] += 1;
    eta[m.index_of(&w0)?] -= 1;
    Ok(Some(eta))
}

/// `ξ = (tz)^ - (αz)^ + ẑ` with `λ = s`: `sξ ∈ N_0` but `sξ ∉ sN_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpurityWitness {
    pub z: IntVec,
    pub xi: IntVec,
    pub lambda: RingElt,
    pub s_xi: IntVec,
}

pub fn impurity_witness(pair: &InclusionPair) -> Result<Option<ImpurityWitness>> {
    let rep = check_t_condition(pair)?;
    let Some(z) = rep.witness else { return Ok(None) };
    let m = &pair.module;
    let pres = &pair.presentation;
    let az = m.apply(&z);
    let tz = m.sub(&az, &z);
    let mut xi = pres.hat(m.index_of(&tz)?);
    xi[m.index_of(&az)?] -= 1;
    xi[m.index_of(&z)?] += 1;
    let s = RingElt::s(pair.p());
    let smat = s.act(&pres.action);
    let s_xi = smat.mul_vec(&xi);
    let s_n0 = pair.n0.image(&smat);
    if !pres.n.contains(&xi) || !pair.n0.contains(&s_xi) || s_n0.contains(&s_xi) {
        return Err(Error::Internal("impurity witness failed to re-verify".into()));
    }
    Ok(Some(ImpurityWitness { z, xi, lambda: s, s_xi }))
}

/// `λN ∩ N_0 = λN_0` for `λ ∈ {t, s, 2, ..., bound}`.
pub fn is_pure(pair: &InclusionPair, bound: u32) -> Result<bool> {
    let p = pair.p();
    let mut lambdas = vec![RingElt::t(p), RingElt::s(p)];
    lambdas.extend((2..=bound).map(|k| RingElt::scalar(p, k)));
    for l in lambdas {
        let lm = l.act(&pair.presentation.action);
        let left = pair.presentation.n.image(&lm).intersect(&pair.n0)?;
        if left != pair.n0.image(&lm) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `N_M / N_{M0}` has no torsion.
pub fn quotient_is_free(pair: &InclusionPair) -> Result<bool> {
    Ok(quotient_invariants(&pair.presentation.n, &pair.n0)?.torsion().is_empty())
}

/// Equivariant idempotent `P` on `N` with image `N_0`, in the coordinates of `N`'s basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub matrix: IntMatrix,
}

impl Projection {
    /// The projection acting on ambient vectors of `N`.
    pub fn apply(&self, n: &Lattice, v: &[BigInt]) -> Option<IntVec> {
        let c = n.coordinates(v)?;
        Some(n.basis().mul_vec(&self.matrix.mul_vec(&c)))
    }
}

/// Searches for an equivariant projection `N -> N_0`; `None` is a proof that none exists.
pub fn find_equivariant_projection(n: &ModLattice, n0: &Lattice) -> Result<Option<Projection>> {
    if !n.lattice.contains_lattice(n0) {
        return Err(Error::NotContained);
    }
    if !n0.contains_lattice(&n0.image(&n.action)) {
        return Err(Error::Precondition("N_0 is not invariant".into()));
    }
    let m = n.rank();
    let n0r = n0.rank();
    let q = m - n0r;
    if q == 0 {
        return Ok(Some(Projection { matrix: IntMatrix::identity(m) }));
    }
    if !n.lattice.is_primitive(n0)? {
        return Ok(None);
    }
    let a = n.coordinate_action()?;
    let c0 = n.lattice.coordinate_matrix(n0)?;
    // W C0 V = [I; 0]; use C0 V as the basis of N_0 so that W C0' = [I; 0].
    let r = snf(&c0);
    let w = r.u;
    let c0p = c0.dot(&r.v);
    let w_inv = inverse_unimodular(&w)?;
    let rows_top: Vec<usize> = (0..n0r).collect();
    let rows_bot: Vec<usize> = (n0r..m).collect();
    let w_top = w.select_rows(&rows_top);
    let qmap = w.select_rows(&rows_bot);
    let sigma0 = w_inv.select_cols(&rows_bot);
    let a_q = qmap.dot(&a).dot(&sigma0);
    let a0 = w_top.dot(&a).dot(&c0p);
    let d = w_top.dot(&a.dot(&sigma0).sub(&sigma0.dot(&a_q)));
    // Z A_Q - A_0 Z = D, vectorised column-major: (A_Q^T ⊗ I - I ⊗ A_0) vec Z = vec D.
    let dim = n0r * q;
    let mut k = IntMatrix::zeros(dim, dim);
    for j in 0..q {
        for i in 0..n0r {
            let row = j * n0r + i;
            for l in 0..q {
                let v = a_q.get(l, j);
                if !v.is_zero() {
                    *k.get_mut(row, l * n0r + i) += v;
                }
            }
            for l in 0..n0r {
                let v = a0.get(i, l);
                if !v.is_zero() {
                    *k.get_mut(row, j * n0r + l) -= v;
                }
            }
        }
    }
    let vec_d: IntVec = (0..q).flat_map(|j| (0..n0r).map(move |i| (i, j))).map(|(i, j)| d.get(i, j).clone()).collect();
    let Some(z) = solve_integer(&k, &vec_d) else { return Ok(None) };
    let zm = IntMatrix::from_cols(&(0..q).map(|j| z[j * n0r..(j + 1) * n0r].to_vec()).collect::<Vec<_>>(), n0r);
    let sigma = sigma0.add(&c0p.dot(&zm));
    let p = IntMatrix::identity(m).sub(&sigma.dot(&qmap));
    let proj = Projection { matrix: p };
    verify_projection(n, n0, &proj)?;
    Ok(Some(proj))
}

fn inverse_unimodular(w: &IntMatrix) -> Result<IntMatrix> {
    let n = w.rows();
    let cols = (0..n)
        .map(|j| {
            let mut e = vec![BigInt::zero(); n];
            e[j] = BigInt::one();
            solve_integer(w, &e).ok_or_else(|| Error::Internal("transform is not unimodular".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntMatrix::from_cols(&cols, n))
}

/// `P^2 = P`, `PA = AP`, and the image of `P` is exactly `N_0`.
pub fn verify_projection(n: &ModLattice, n0: &Lattice, proj: &Projection) -> Result<()> {
    let a = n.coordinate_action()?;
    let p = &proj.matrix;
    if p.dot(p) != *p || p.dot(&a) != a.dot(p) {
        return Err(Error::Internal("projection is not an equivariant idempotent".into()));
    }
    let image = Lattice::from_columns(&n.lattice.basis().dot(p));
    if &image != n0 {
        return Err(Error::Internal("projection image differs from N_0".into()));
    }
    Ok(())
}

/// Data of the commutative diagram with exact rows for `M0 ⊆ M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionDiagram {
    pub top: StabilizedPresentation,
    pub bottom: StabilizedPresentation,
    /// Element `j` of `M0` (in its own enumeration) is element `inclusion[j]` of `M`.
    pub inclusion: Vec<usize>,
    /// Equivariant projection of `N_M` onto `N_{M0}`.
    pub projection: Projection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagramOutcome {
    Diagram(Box<InclusionDiagram>),
    Refusal(ImpurityWitness),
}

pub fn diagram_cor_1_18(pair: &InclusionPair, opts: &SearchOptions) -> Result<DiagramOutcome> {
    let cond = check_t_condition(pair)?;
    if !cond.holds {
        let w = impurity_witness(pair)?.ok_or_else(|| Error::Internal("condition fails without witness".into()))?;
        return Ok(DiagramOutcome::Refusal(w));
    }
    let projection = find_equivariant_projection(&pair.n(), &pair.n0)?
        .ok_or_else(|| Error::Internal("condition holds but no equivariant projection exists".into()))?;
    let emb = pair.module.embed(&pair.sub)?;
    let mut top = stabilize_presentation(&pair.module, opts)?;
    let mut bottom = stabilize_presentation(&emb.module, opts)?;
    let k = top.k.max(bottom.k);
    top.extend_to(k)?;
    bottom.extend_to(k)?;
    let inclusion = bottom
        .presentation
        .elements
        .iter()
        .map(|x| pair.module.index_of(&emb.include(x)))
        .collect::<Result<Vec<_>>>()?;
    let d = InclusionDiagram { top, bottom, inclusion, projection };
    verify_diagram(pair, &d)?;
    Ok(DiagramOutcome::Diagram(Box::new(d)))
}

/// Columns are injective and equivariant, squares commute, and `N_{M0}` maps onto `N_0`.
pub fn verify_diagram(pair: &InclusionPair, d: &InclusionDiagram) -> Result<()> {
    let top = &d.top.presentation;
    let bot = &d.bottom.presentation;
    let mut seen = std::collections::HashSet::new();
    for (j, &i) in d.inclusion.iter().enumerate() {
        if !seen.insert(i) {
            return Err(Error::Internal("inclusion is not injective".into()));
        }
        if d.inclusion[bot.perm[j]] != top.perm[i] {
            return Err(Error::Internal("inclusion is not equivariant".into()));
        }
    }
    let map = |v: &IntVec| {
        let mut w = vec![BigInt::zero(); top.size()];
        for (j, c) in v.iter().enumerate() {
            w[d.inclusion[j]] += c;
        }
        w
    };
    let image = Lattice::from_generators(top.size(), bot.n.vectors().iter().map(map).collect());
    if image != pair.n0 {
        return Err(Error::Internal("N_{M0} does not map onto N_0".into()));
    }
    for v in bot.n.vectors() {
        if !is_zero_vec(&top.project(&map(v))) {
            return Err(Error::Internal("diagram does not commute".into()));
        }
    }
    verify_projection(&pair.n(), &pair.n0, &d.projection)?;
    let diff = vec_sub(&pair.presentation.hat(0), &top.hat(0));
    debug_assert!(is_zero_vec(&diff));
    Ok(())
}
