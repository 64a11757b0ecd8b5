//! K-theory of gadget graphs through the boundary matrix.
//!
//! Rows are all instantiated vertices, columns the regular ones, and the
//! column of `x` is `Σ_{e: o(e)=x} δ_{t(e)} - δ_x`. Then `K_0 = coker D` and
//! `K_1 = ker D`. Truncated rays are closed as follows: a descending ray keeps
//! all its vertices as columns and gets one ghost column, the relation its
//! missing successor would contribute; the top of an ascending ray is a row
//! without a column. [`stabilization_check`] compares several depths so the
//! closure is tested rather than assumed.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo_ring::PolyZ;
use crate::error::{Error, Result};
use crate::graphkit::{
    a_vertex, is_irreducible, validate_automorphism, GadgetGraph, GraphSpecInput, Materialized, Orientation, VertexId,
    VertexKind,
};
use crate::intlinalg::{kernel_basis, quotient_invariants, snf, solve_integer, IntMatrix, IntVec, Lattice, QuotientInvariants};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnId {
    Vertex(usize),
    /// Closure relation of ray `r`.
    Ghost(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub mat: Materialized,
    pub rows: Vec<String>,
    pub cols: Vec<ColumnId>,
    pub d: IntMatrix,
}

pub fn boundary_matrix(g: &GadgetGraph, depth: usize) -> Result<BoundaryMatrix> {
    let mat = g.materialize(depth)?;
    let n = mat.ids.len();
    let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (&(a, b), &m) in &mat.edges {
        out[a].push((b, m));
    }
    let mut cols = Vec::new();
    let mut columns: Vec<IntVec> = Vec::new();
    for x in 0..n {
        if mat.emitters[x] || mat.boundary[x] || out[x].is_empty() {
            continue;
        }
        let mut c = vec![BigInt::zero(); n];
        for &(t, m) in &out[x] {
            c[t] += m;
        }
        c[x] -= 1;
        cols.push(ColumnId::Vertex(x));
        columns.push(c);
    }
    let emitter = g.emitter();
    for (r, ray) in g.rays.iter().enumerate() {
        if ray.orientation != Orientation::Descending || !ray.closed {
            continue;
        }
        let mut c = vec![BigInt::zero(); n];
        c[mat.index[&VertexId::Ray(r, depth)]] += ray.multiplicity;
        if ray.emitter_edges {
            c[emitter.expect("materialized")] += 1;
        }
        cols.push(ColumnId::Ghost(r));
        columns.push(c);
    }
    let rows = mat.ids.iter().map(|&id| g.label(id)).collect();
    Ok(BoundaryMatrix { d: IntMatrix::from_cols(&columns, n), mat, rows, cols })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KResult {
    pub depth: usize,
    pub k0: QuotientInvariants,
    /// Orders of the `K_0` generators, `0` for free ones.
    pub k0_orders: Vec<BigInt>,
    /// Class of `δ_x` for every instantiated vertex, in generator coordinates.
    pub classes: Vec<IntVec>,
    /// Kernel basis over the columns.
    pub k1_basis: Vec<IntVec>,
    pub cols: Vec<ColumnId>,
    pub induced_k0: Option<IntMatrix>,
    pub induced_k1: Option<IntMatrix>,
    /// Row transform of the Smith form restricted to the generator rows.
    #[serde(skip)]
    u_rows: Option<IntMatrix>,
    #[serde(skip)]
    gen_preimages: Vec<IntVec>,
}

impl KResult {
    pub fn k1_rank(&self) -> usize {
        self.k1_basis.len()
    }

    pub fn describe(&self) -> String {
        let k1 = match self.k1_rank() {
            0 => "0".to_string(),
            1 => "Z".to_string(),
            r => format!("Z^{r}"),
        };
        format!("({}, {k1})", self.k0.describe())
    }

    fn reduce_k0(&self, v: &mut IntVec) {
        for (x, d) in v.iter_mut().zip(&self.k0_orders) {
            if !d.is_zero() {
                *x = x.mod_floor(d);
            }
        }
    }

    /// `K_0` coordinates of an integer combination of vertices.
    pub fn class_of(&self, v: &[BigInt]) -> IntVec {
        let mut c = self.u_rows.as_ref().expect("computed").mul_vec(v);
        self.reduce_k0(&mut c);
        c
    }
}

pub fn compute_k(g: &GadgetGraph, depth: usize) -> Result<KResult> {
    if depth < 2 {
        return Err(Error::Precondition("depth must be at least 2".into()));
    }
    let bm = boundary_matrix(g, depth)?;
    k_from_boundary(&bm)
}

pub fn k_from_boundary(bm: &BoundaryMatrix) -> Result<KResult> {
    let n = bm.d.rows();
    let r = snf(&bm.d);
    let diag = r.diagonal();
    let (factors, free_rank) = r.cokernel();
    let gens: Vec<usize> = (0..n).filter(|&i| i >= diag.len() || !diag[i].is_one()).collect();
    let k0_orders: Vec<BigInt> = gens.iter().map(|&i| diag.get(i).cloned().unwrap_or_else(BigInt::zero)).collect();
    let u_rows = r.u.select_rows(&gens);
    let mut gen_preimages = Vec::with_capacity(gens.len());
    for &i in &gens {
        let mut e = vec![BigInt::zero(); n];
        e[i] = BigInt::one();
        gen_preimages.push(solve_integer(&r.u, &e).ok_or_else(|| Error::Internal("row transform not unimodular".into()))?);
    }
    let k1_basis = kernel_basis(&bm.d).vectors().to_vec();
    let mut kr = KResult {
        depth: bm.mat.depth,
        k0: QuotientInvariants { factors, free_rank },
        k0_orders,
        classes: Vec::new(),
        k1_basis,
        cols: bm.cols.clone(),
        induced_k0: None,
        induced_k1: None,
        u_rows: Some(u_rows),
        gen_preimages,
    };
    kr.classes = (0..n)
        .map(|x| {
            let mut c = kr.u_rows.as_ref().expect("set").col(x);
            kr.reduce_k0(&mut c);
            c
        })
        .collect();
    // Every relation column dies in K_0.
    for c in bm.d.col_vecs() {
        if kr.class_of(&c).iter().any(|x| !x.is_zero()) {
            return Err(Error::Internal("class map does not respect a relation".into()));
        }
    }
    Ok(kr)
}

/// Fills in the matrices of the graph automorphism on `K_0` and `K_1`.
pub fn induced_action(g: &GadgetGraph, mut kr: KResult) -> Result<KResult> {
    validate_automorphism(g)?;
    let bm = boundary_matrix(g, kr.depth)?;
    let perm = g.sigma_on(&bm.mat);
    let col_index: HashMap<ColumnId, usize> = bm.cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let col_perm: Vec<usize> = bm
        .cols
        .iter()
        .map(|&c| match c {
            ColumnId::Vertex(x) => col_index[&ColumnId::Vertex(perm[x])],
            ColumnId::Ghost(r) => col_index[&ColumnId::Ghost(g.ray_sigma[r])],
        })
        .collect();
    // σ D = D σ on the nose.
    for (j, c) in bm.d.col_vecs().iter().enumerate() {
        let mut moved = vec![BigInt::zero(); c.len()];
        for (i, x) in c.iter().enumerate() {
            moved[perm[i]] = x.clone();
        }
        if moved != bm.d.col(col_perm[j]) {
            return Err(Error::AutomorphismViolation("boundary matrix is not equivariant".into()));
        }
    }
    let k = kr.k0_orders.len();
    let cols: Vec<IntVec> = (0..k)
        .map(|j| {
            let w = &kr.gen_preimages[j];
            let mut moved = vec![BigInt::zero(); w.len()];
            for (i, x) in w.iter().enumerate() {
                moved[perm[i]] = x.clone();
            }
            kr.class_of(&moved)
        })
        .collect();
    kr.induced_k0 = Some(IntMatrix::from_cols(&cols, k));
    let ker = Lattice::from_generators(bm.cols.len(), kr.k1_basis.clone());
    let k1_cols = kr
        .k1_basis
        .iter()
        .map(|v| {
            let mut moved = vec![BigInt::zero(); v.len()];
            for (i, x) in v.iter().enumerate() {
                moved[col_perm[i]] = x.clone();
            }
            ker.coordinates(&moved).ok_or_else(|| Error::Internal("kernel is not invariant".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    kr.induced_k1 = Some(IntMatrix::from_cols(&k1_cols, kr.k1_basis.len()));
    Ok(kr)
}

/// Whether `m^e` is the identity on `K_0`, i.e. modulo the generator orders.
pub fn k0_power_is_identity(kr: &KResult, m: &IntMatrix, e: usize) -> bool {
    let pw = m.pow(e);
    (0..pw.cols()).all(|j| {
        let mut c = pw.col(j);
        c[j] -= 1;
        kr.reduce_k0(&mut c);
        c.iter().all(Zero::is_zero)
    })
}

/// Characteristic polynomial `det(xI - A)` by Faddeev–LeVerrier with exact division.
pub fn char_poly(a: &IntMatrix) -> PolyZ {
    let n = a.rows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zeros(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1].clone();
        m = a.dot(&m).add(&IntMatrix::identity(n).scale(&prev));
        let am = a.dot(&m);
        let tr: BigInt = (0..n).map(|i| am.get(i, i).clone()).sum();
        coeffs[n - k] = -(tr / BigInt::from(k));
    }
    PolyZ::new(coeffs)
}

/// Rank of the fixed sublattice of an integer matrix.
pub fn fixed_rank(a: &IntMatrix) -> usize {
    kernel_basis(&a.sub(&IntMatrix::identity(a.rows()))).rank()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub depth: usize,
    pub k0: QuotientInvariants,
    pub k1_rank: usize,
    /// Integer relations among the classes of the core vertices.
    pub core_relations: Lattice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub depths: Vec<usize>,
    pub per_depth: Vec<DepthSummary>,
    pub stable: bool,
}

pub fn stabilization_check(g: &GadgetGraph, depths: &[usize]) -> Result<TruncationReport> {
    if depths.len() < 2 || depths.iter().any(|&d| d < 2) {
        return Err(Error::Precondition("need at least two depths, each at least 2".into()));
    }
    let core = g.vertices.len();
    let mut per_depth = Vec::new();
    for &depth in depths {
        let bm = boundary_matrix(g, depth)?;
        let kr = k_from_boundary(&bm)?;
        let image = Lattice::from_columns(&bm.d);
        let embed = IntMatrix::identity(bm.d.rows()).select_cols(&(0..core).collect::<Vec<_>>());
        per_depth.push(DepthSummary {
            depth,
            k1_rank: kr.k1_rank(),
            k0: kr.k0,
            core_relations: image.preimage(&embed),
        });
    }
    let first = &per_depth[0];
    let stable = per_depth.iter().all(|s| {
        s.k0.torsion() == first.k0.torsion()
            && s.k0.free_rank == first.k0.free_rank
            && s.k1_rank == first.k1_rank
            && s.core_relations == first.core_relations
    });
    Ok(TruncationReport { depths: depths.to_vec(), per_depth, stable })
}

/// A descending ray with doubled edges and no closure: every depth adds a `Z/2`
/// and the top class stays free, so truncations disagree.
pub fn misclosed_fixture() -> GadgetGraph {
    use crate::graphkit::{CoreVertex, GraphFamily, RaySpec};
    let mut g = GadgetGraph::new(
        GraphFamily::Custom,
        vec![CoreVertex { label: "v".into(), kind: VertexKind::InfiniteEmitter }],
    );
    let mut ray = RaySpec::descending("r", 0, false);
    ray.multiplicity = 2;
    ray.closed = false;
    g.add_ray(ray);
    g
}

/// One line per property of the realization theorem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub depth: usize,
    pub irreducible: bool,
    pub unique_emitter: bool,
    pub automorphism_order: usize,
    pub action_order: usize,
    pub degenerate_order: bool,
    pub emitter_fixed: bool,
    pub equivariant_injection: bool,
    pub k0: QuotientInvariants,
    pub group: QuotientInvariants,
    pub k0_matches_group: bool,
    pub k1_zero: bool,
    /// `Φ: K_0 -> G` on generators (columns), in group coordinates.
    pub phi: Option<IntMatrix>,
    pub class_map_ok: bool,
    pub induced_matches: bool,
    pub cross_pipeline: bool,
    pub stable: bool,
    pub failures: Vec<String>,
}

impl RealizationReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn verify_theorem_2_1(g: &GadgetGraph, input: &GraphSpecInput, depth: usize) -> Result<RealizationReport> {
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
        ok
    };
    let irreducible = check(is_irreducible(g)?, "graph is not irreducible");
    let unique_emitter = check(g.emitter().is_some(), "not exactly one infinite emitter");
    let auto = validate_automorphism(g)?;
    let grp = &input.group;
    let action_order = grp.action_order();
    check(auto.order == action_order, "automorphism order differs from the order of α");
    let emitter_fixed = check(auto.fixes_emitter, "emitter not fixed");
    let n = input.a_len();
    let mut injective = std::collections::HashSet::new();
    let equivariant_injection = check(
        (0..n).all(|a| injective.insert(a_vertex(a)) && g.sigma[a_vertex(a)] == a_vertex(input.a_perm[a]))
            && (0..n).all(|a| g.vertices[a_vertex(a)].label == format!("a[{}]", input.a_labels[a])),
        "A -> E^0 is not an equivariant injection",
    );

    let kr = induced_action(g, compute_k(g, depth)?)?;
    let group_inv = quotient_invariants(&Lattice::full(grp.rank()), grp.relations())?;
    let k0_matches_group = check(
        kr.k0.torsion() == group_inv.torsion() && kr.k0.free_rank == group_inv.free_rank,
        "K0 invariants differ from G",
    );
    let k1_zero = check(kr.k1_rank() == 0, "K1 is not zero");

    // Φ(e_j) = Σ c_a π_0(a) for any c with Σ c_a [a] = e_j.
    let k = kr.k0_orders.len();
    let ka = IntMatrix::from_cols(&(0..n).map(|a| kr.classes[a_vertex(a)].clone()).collect::<Vec<_>>(), k);
    let torsion_cols: Vec<IntVec> = kr
        .k0_orders
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(i, d)| {
            let mut c = vec![BigInt::zero(); k];
            c[i] = d.clone();
            c
        })
        .collect();
    let sys = ka.hstack(&IntMatrix::from_cols(&torsion_cols, k));
    let pi = IntMatrix::from_cols(&input.pi0, grp.rank());
    let mut phi_cols = Vec::new();
    for j in 0..k {
        let mut e = vec![BigInt::zero(); k];
        e[j] = BigInt::one();
        match solve_integer(&sys, &e) {
            Some(sol) => phi_cols.push(grp.reduce(&pi.mul_vec(&sol[..n]))),
            None => break,
        }
    }
    let phi = (phi_cols.len() == k).then(|| IntMatrix::from_cols(&phi_cols, grp.rank()));
    check(phi.is_some(), "K0 is not generated by the classes of A");
    let class_map_ok = check(
        phi.as_ref().is_some_and(|phi| {
            let well_defined =
                (0..k).all(|j| grp.is_zero(&phi.col(j).iter().map(|x| x * &kr.k0_orders[j]).collect::<IntVec>()));
            let sends =
                (0..n).all(|a| grp.reduce(&phi.mul_vec(&kr.classes[a_vertex(a)])) == grp.reduce(&input.pi0[a]));
            well_defined && sends
        }),
        "[a] does not map to π_0(a)",
    );
    let t = kr.induced_k0.as_ref().expect("computed");
    let induced_matches = check(
        phi.as_ref().is_some_and(|phi| {
            (0..k).all(|j| grp.reduce(&phi.dot(t).col(j)) == grp.reduce(&grp.apply(&phi.col(j))))
        }) && k0_power_is_identity(&kr, t, input.p),
        "induced K0 action differs from α",
    );
    let span_b = Lattice::from_generators(n, input.b.clone());
    let cross = quotient_invariants(&Lattice::full(n), &span_b)?;
    let cross_pipeline =
        check(cross.torsion() == kr.k0.torsion() && cross.free_rank == kr.k0.free_rank, "Z^A/<B> differs from K0");
    let depths = [2, 3, 4];
    let stable = check(stabilization_check(g, &depths)?.stable, "truncations disagree");
    Ok(RealizationReport {
        depth,
        irreducible,
        unique_emitter,
        automorphism_order: auto.order,
        action_order,
        degenerate_order: auto.degenerate,
        emitter_fixed,
        equivariant_injection,
        k0: kr.k0.clone(),
        group: group_inv,
        k0_matches_group,
        k1_zero,
        phi,
        class_map_ok,
        induced_matches,
        cross_pipeline,
        stable,
        failures,
    })
}

/// Columns of the depth-one strand vertices `x_{i,1}`, in strand order.
pub fn strand_first_columns(g: &GadgetGraph, kr: &KResult) -> Result<Vec<usize>> {
    let bm = boundary_matrix(g, kr.depth)?;
    (0..g.rays.len())
        .map(|r| {
            let x = bm.mat.index[&VertexId::Ray(r, 1)];
            kr.cols
                .iter()
                .position(|&c| c == ColumnId::Vertex(x))
                .ok_or_else(|| Error::Internal("strand vertex has no column".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphkit::{build_spielberg, build_strand_graph, delete_strand, z2_swap_input};
    use crate::presentation::SearchOptions;
    use crate::zmod::{build, ModSpec};

    fn strand(m: usize, from: usize, depth: usize) -> KResult {
        compute_k(&build_strand_graph(m, from).unwrap(), depth).unwrap()
    }

    #[test]
    fn strand_k_groups() {
        // Hand reduction: columns of x_{i,1} all equal δ_w, deeper ones are distinct units.
        assert_eq!(strand(1, 1, 2).describe(), "(0, 0)");
        assert_eq!(strand(2, 2, 2).describe(), "(0, Z)");
        assert_eq!(strand(3, 1, 3).describe(), "(0, Z^2)");
        assert_eq!(strand(4, 1, 4).describe(), "(0, Z^3)");
    }

    #[test]
    fn strand_action_on_k1() {
        let g = build_strand_graph(3, 1).unwrap();
        let kr = induced_action(&g, compute_k(&g, 3).unwrap()).unwrap();
        let m = kr.induced_k1.clone().unwrap();
        assert_eq!(fixed_rank(&m), 1);
        let cp = char_poly(&m);
        assert!(cp.div_exact(&PolyZ::from_i64(&[-1, 1])).is_ok());
        assert!(cp.div_exact(&PolyZ::from_i64(&[1, 1])).is_ok());
        let cols = strand_first_columns(&g, &kr).unwrap();
        for v in &kr.k1_basis {
            let total: BigInt = cols.iter().map(|&c| v[c].clone()).sum();
            assert!(total.is_zero());
            let support: usize = v.iter().filter(|x| !x.is_zero()).count();
            assert!(support <= cols.len());
        }
        let del = delete_strand(&g, 0).unwrap();
        let kd = induced_action(&del, compute_k(&del, 3).unwrap()).unwrap();
        assert_eq!(kd.k1_rank(), 1);
        assert_eq!(fixed_rank(kd.induced_k1.as_ref().unwrap()), 0);
    }

    #[test]
    fn char_poly_of_shift() {
        let shift = IntMatrix::permutation(&[1, 2, 0]);
        assert_eq!(char_poly(&shift), PolyZ::from_i64(&[-1, 0, 0, 1]));
    }

    #[test]
    fn misclosed_ray_is_unstable() {
        let rep = stabilization_check(&misclosed_fixture(), &[2, 3, 4]).unwrap();
        assert!(!rep.stable);
        for s in [1usize, 2, 3] {
            let rep = stabilization_check(&build_strand_graph(s, s).unwrap(), &[2, 3, 4]).unwrap();
            assert!(rep.stable);
        }
    }

    #[test]
    fn realization_z5() {
        let m = build(&ModSpec::parse("cyclic(5,4)").unwrap(), 2).unwrap();
        let inp = GraphSpecInput::from_module(&m, &SearchOptions::default()).unwrap();
        let g = build_spielberg(&inp).unwrap();
        let rep = verify_theorem_2_1(&g, &inp, 3).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures);
        assert_eq!(rep.k0.describe(), "Z/5");
    }

    #[test]
    fn realization_z2_swap() {
        let inp = z2_swap_input().unwrap();
        let g = build_spielberg(&inp).unwrap();
        let rep = verify_theorem_2_1(&g, &inp, 3).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures);
        assert_eq!(rep.k0.free_rank, 2);
        let kr = induced_action(&g, compute_k(&g, 3).unwrap()).unwrap();
        let phi = rep.phi.unwrap();
        // Transported action is the swap.
        assert_eq!(phi.dot(kr.induced_k0.as_ref().unwrap()), IntMatrix::from_i64(&[&[0, 1], &[1, 0]]).dot(&phi));
    }

    #[test]
    fn empty_graph() {
        let g = GadgetGraph::new(crate::graphkit::GraphFamily::Custom, vec![]);
        let bm = boundary_matrix(&g, 2).unwrap();
        assert_eq!((bm.d.rows(), bm.d.cols()), (0, 0));
    }
}
