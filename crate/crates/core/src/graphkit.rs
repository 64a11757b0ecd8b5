//! Directed multigraphs with symbolic infinite rays and a distinguished
//! infinite emitter.
//!
//! A [`GadgetGraph`] stores finitely many core vertices and a list of rays.
//! A ray is an infinite chain `r_1, r_2, ...` attached to a core base vertex:
//!
//! * `Descending`: `r_j` emits a loop and `multiplicity` edges to `r_{j-1}`
//!   (with `r_0` the base), plus optionally one edge to the emitter.
//! * `Ascending`: the base emits one edge to `r_1`; `r_j` emits a loop, one
//!   edge to `r_{j+1}` and optionally one edge to the emitter.
//!
//! The infinite emitter emits one edge to every other vertex, rays included.
//! Rays are instantiated only up to a requested depth.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::{IntMatrix, IntVec, Lattice};
use crate::presentation::{find_invariant_basis, build_aug, SearchOptions};
use crate::zmod::FinMod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Standard,
    InfiniteEmitter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreVertex {
    pub label: String,
    pub kind: VertexKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Descending,
    Ascending,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaySpec {
    pub family: String,
    pub base: usize,
    pub orientation: Orientation,
    /// Number of edges from each vertex to its neighbour along the chain.
    pub multiplicity: u32,
    /// Each ray vertex also emits one edge to the infinite emitter.
    pub emitter_edges: bool,
    /// A truncated descending ray is closed by the relation its missing successor would impose.
    pub closed: bool,
}

impl RaySpec {
    pub fn descending(family: impl Into<String>, base: usize, emitter_edges: bool) -> Self {
        RaySpec {
            family: family.into(),
            base,
            orientation: Orientation::Descending,
            multiplicity: 1,
            emitter_edges,
            closed: true,
        }
    }

    pub fn ascending(family: impl Into<String>, base: usize) -> Self {
        RaySpec {
            family: family.into(),
            base,
            orientation: Orientation::Ascending,
            multiplicity: 1,
            emitter_edges: true,
            closed: true,
        }
    }

    fn same_shape(&self, o: &RaySpec) -> bool {
        self.orientation == o.orientation
            && self.multiplicity == o.multiplicity
            && self.emitter_edges == o.emitter_edges
            && self.closed == o.closed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphFamily {
    Realization,
    Strand,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetGraph {
    pub family: GraphFamily,
    pub vertices: Vec<CoreVertex>,
    /// Edges among core vertices: `(origin, target) -> multiplicity`.
    pub edges: BTreeMap<(usize, usize), u64>,
    pub rays: Vec<RaySpec>,
    /// Automorphism on core vertices.
    pub sigma: Vec<usize>,
    /// Automorphism on rays; ray vertex `(i, j)` goes to `(ray_sigma[i], j)`.
    pub ray_sigma: Vec<usize>,
}

/// Vertex of a depth-`L` instantiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexId {
    Core(usize),
    Ray(usize, usize),
}

/// Finite instantiation: all core vertices plus ray vertices of depth `1..=L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Materialized {
    pub depth: usize,
    pub ids: Vec<VertexId>,
    pub index: HashMap<VertexId, usize>,
    /// Edges with multiplicity, only between instantiated vertices.
    pub edges: BTreeMap<(usize, usize), u64>,
    /// Vertices whose out-edges leave the instantiation; they get rows but no columns.
    pub boundary: Vec<bool>,
    pub emitters: Vec<bool>,
}

impl GadgetGraph {
    pub fn new(family: GraphFamily, vertices: Vec<CoreVertex>) -> Self {
        let n = vertices.len();
        GadgetGraph { family, vertices, edges: BTreeMap::new(), rays: Vec::new(), sigma: (0..n).collect(), ray_sigma: Vec::new() }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, mult: u64) {
        if mult > 0 {
            *self.edges.entry((from, to)).or_insert(0) += mult;
        }
    }

    pub fn add_ray(&mut self, ray: RaySpec) -> usize {
        self.rays.push(ray);
        self.ray_sigma.push(self.rays.len() - 1);
        self.rays.len() - 1
    }

    pub fn emitters(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].kind == VertexKind::InfiniteEmitter).collect()
    }

    pub fn emitter(&self) -> Option<usize> {
        let e = self.emitters();
        (e.len() == 1).then(|| e[0])
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn label(&self, id: VertexId) -> String {
        match id {
            VertexId::Core(i) => self.vertices[i].label.clone(),
            VertexId::Ray(r, j) => format!("{}_{j}", self.rays[r].family),
        }
    }

    pub fn materialize(&self, depth: usize) -> Result<Materialized> {
        if depth == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        let emitter = match self.emitters().as_slice() {
            [] => None,
            [e] => Some(*e),
            _ => return Err(Error::InvalidGraphInput("more than one infinite emitter".into())),
        };
        let needs_emitter = self.rays.iter().any(|r| r.emitter_edges);
        if needs_emitter && emitter.is_none() {
            return Err(Error::InvalidGraphInput("ray edges to a missing emitter".into()));
        }
        let mut ids: Vec<VertexId> = (0..self.vertices.len()).map(VertexId::Core).collect();
        for r in 0..self.rays.len() {
            ids.extend((1..=depth).map(|j| VertexId::Ray(r, j)));
        }
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = BTreeMap::new();
        let mut add = |a: usize, b: usize, m: u64| {
            if m > 0 {
                *edges.entry((a, b)).or_insert(0) += m;
            }
        };
        for (&(a, b), &m) in &self.edges {
            add(a, b, m);
        }
        let mut boundary = vec![false; ids.len()];
        for (r, ray) in self.rays.iter().enumerate() {
            let at = |j: usize| if j == 0 { ray.base } else { index[&VertexId::Ray(r, j)] };
            let mult = u64::from(ray.multiplicity);
            if ray.orientation == Orientation::Ascending {
                add(ray.base, at(1), mult);
            }
            for j in 1..=depth {
                let x = at(j);
                add(x, x, 1);
                match ray.orientation {
                    Orientation::Descending => add(x, at(j - 1), mult),
                    Orientation::Ascending if j < depth => add(x, at(j + 1), mult),
                    Orientation::Ascending => boundary[x] = true,
                }
                if ray.emitter_edges {
                    add(x, emitter.expect("checked"), 1);
                }
            }
        }
        let mut emitters = vec![false; ids.len()];
        if let Some(e) = emitter {
            emitters[e] = true;
            for i in 0..ids.len() {
                if i != e {
                    add(e, i, 1);
                }
            }
        }
        Ok(Materialized { depth, ids, index, edges, boundary, emitters })
    }

    pub fn vertex_count(&self, depth: usize) -> usize {
        self.vertices.len() + self.rays.len() * depth
    }

    /// Automorphism on the instantiated vertex list.
    pub fn sigma_on(&self, mat: &Materialized) -> Vec<usize> {
        mat.ids
            .iter()
            .map(|&id| match id {
                VertexId::Core(i) => mat.index[&VertexId::Core(self.sigma[i])],
                VertexId::Ray(r, j) => mat.index[&VertexId::Ray(self.ray_sigma[r], j)],
            })
            .collect()
    }
}

/// Certificate returned by [`validate_automorphism`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismReport {
    pub order: usize,
    pub fixes_emitter: bool,
    /// An order-1 automorphism is recorded rather than rejected.
    pub degenerate: bool,
}

pub fn validate_automorphism(g: &GadgetGraph) -> Result<AutomorphismReport> {
    let n = g.vertices.len();
    let bad = |m: String| Err(Error::AutomorphismViolation(m));
    if g.sigma.len() != n || !is_permutation(&g.sigma) {
        return bad("core map is not a permutation".into());
    }
    if g.ray_sigma.len() != g.rays.len() || !is_permutation(&g.ray_sigma) {
        return bad("ray map is not a permutation".into());
    }
    for i in 0..n {
        if g.vertices[i].kind != g.vertices[g.sigma[i]].kind {
            return bad(format!("vertex {} changes kind", g.vertices[i].label));
        }
    }
    for (&(a, b), &m) in &g.edges {
        let img = g.edges.get(&(g.sigma[a], g.sigma[b])).copied().unwrap_or(0);
        if img != m {
            return bad(format!(
                "edge {} -> {} (x{m}) maps to multiplicity {img}",
                g.vertices[a].label, g.vertices[b].label
            ));
        }
    }
    for (r, ray) in g.rays.iter().enumerate() {
        let img = &g.rays[g.ray_sigma[r]];
        if img.base != g.sigma[ray.base] || !ray.same_shape(img) {
            return bad(format!("ray {} is not carried to a matching ray", ray.family));
        }
    }
    let fixes_emitter = g.emitters().iter().all(|&e| g.sigma[e] == e);
    if !fixes_emitter {
        return bad("the infinite emitter is moved".into());
    }
    let order = perm_order(&g.sigma).lcm(&perm_order(&g.ray_sigma));
    Ok(AutomorphismReport { order, fixes_emitter, degenerate: order == 1 })
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

pub fn perm_order(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut order = 1usize;
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        order = order.lcm(&len);
    }
    order
}

/// Strong connectivity of a depth-3 instantiation. Edges from ascending tops to
/// deeper vertices are absent there, but each such top has its own route back
/// through its emitter edge, so the truncation decides the infinite graph.
pub fn is_irreducible(g: &GadgetGraph) -> Result<bool> {
    if g.vertices.is_empty() && g.rays.is_empty() {
        return Ok(false);
    }
    for ray in &g.rays {
        if ray.orientation == Orientation::Ascending && !ray.emitter_edges {
            // The infinite tail never returns.
            return Ok(false);
        }
    }
    let mat = g.materialize(3)?;
    let mut dg: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..mat.ids.len()).map(|_| dg.add_node(())).collect();
    for &(a, b) in mat.edges.keys() {
        dg.add_edge(nodes[a], nodes[b], ());
    }
    Ok(kosaraju_scc(&dg).len() == 1)
}

/// Hypotheses of the realization construction: a module `G`, a finite set `A`
/// with a permutation, an equivariant `π_0: A -> G` and a basis `B` of `ker π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpecInput {
    pub p: usize,
    pub group: FinMod,
    pub a_labels: Vec<String>,
    /// Action on `A`.
    pub a_perm: Vec<usize>,
    /// `π_0(a)` in the coordinates of `group`.
    pub pi0: Vec<IntVec>,
    /// Vectors over `A`.
    pub b: Vec<IntVec>,
    /// Action on `B`: `α b_j = b_{b_perm[j]}`.
    pub b_perm: Vec<usize>,
}

impl GraphSpecInput {
    /// Checks the hypotheses and derives the permutation of `B`.
    pub fn new(group: FinMod, a_labels: Vec<String>, a_perm: Vec<usize>, pi0: Vec<IntVec>, b: Vec<IntVec>) -> Result<Self> {
        let p = group.p();
        let n = a_perm.len();
        let bad = |m: String| Error::Precondition(m);
        if a_labels.len() != n || pi0.len() != n || !is_permutation(&a_perm) {
            return Err(bad("A, its labels, its permutation and π_0 disagree in size".into()));
        }
        if perm_order(&a_perm) > 1 && perm_order(&a_perm) != p {
            return Err(bad(format!("action on A has order {} not dividing {p}", perm_order(&a_perm))));
        }
        for (i, x) in pi0.iter().enumerate() {
            group.check_element(x).map_err(|e| bad(e.to_string()))?;
            if group.reduce(&group.apply(x)) != group.reduce(&pi0[a_perm[i]]) {
                return Err(bad(format!("π_0 is not equivariant at {}", a_labels[i])));
            }
        }
        let pi = IntMatrix::from_cols(&pi0, group.rank());
        if Lattice::from_columns(&pi).sum(group.relations())? != Lattice::full(group.rank()) {
            return Err(bad("π_0(A) does not generate the group".into()));
        }
        if b.iter().any(|v| v.len() != n) {
            return Err(bad("a vector of B has the wrong length".into()));
        }
        let kernel = group.relations().preimage(&pi);
        for (j, v) in b.iter().enumerate() {
            if !kernel.contains(v) {
                return Err(bad(format!("b_{j} is not in the kernel of π")));
            }
        }
        let span = Lattice::from_generators(n, b.clone());
        if span.rank() != b.len() {
            return Err(bad("B is linearly dependent".into()));
        }
        if span != kernel {
            return Err(bad("B does not span the kernel of π".into()));
        }
        let mut b_perm = Vec::with_capacity(b.len());
        for v in &b {
            let mut img = vec![BigInt::zero(); n];
            for (a, c) in v.iter().enumerate() {
                img[a_perm[a]] = c.clone();
            }
            match b.iter().position(|w| *w == img) {
                Some(k) => b_perm.push(k),
                None => return Err(bad("B is not invariant under the action".into())),
            }
        }
        Ok(GraphSpecInput { p, group, a_labels, a_perm, pi0, b, b_perm })
    }

    /// `A = M`, `π_0 = id`, `B` an invariant basis of `N_M`, with free orbits
    /// mapping to 0 adjoined when the basis needs stabilization.
    pub fn from_module(m: &FinMod, opts: &SearchOptions) -> Result<Self> {
        let pres = build_aug(m)?;
        let found = find_invariant_basis(&pres, true, opts)?;
        let p = m.p();
        let n = pres.size();
        let mut labels: Vec<String> = pres.elements.iter().map(|x| m.format_element(x)).collect();
        let mut a_perm = pres.perm.clone();
        let mut pi0 = pres.elements.clone();
        for j in 0..found.k {
            for i in 0..p {
                labels.push(format!("f{j}.{i}"));
                a_perm.push(n + j * p + (i + 1) % p);
                pi0.push(m.zero_element());
            }
        }
        Self::new(m.clone(), labels, a_perm, pi0, found.basis.vectors())
    }

    pub fn a_len(&self) -> usize {
        self.a_perm.len()
    }
}

/// The graph realizing `(G, α)`: vertex `v`, one vertex per `a ∈ A` with a
/// loop, an edge to `v` and an ascending ray, and per `b ∈ B` a head `z_b`
/// with a descending ray feeding `z_b^+` and `z_b^-`.
pub fn build_spielberg(input: &GraphSpecInput) -> Result<GadgetGraph> {
    let n = input.a_len();
    let mut verts = vec![CoreVertex { label: "v".into(), kind: VertexKind::InfiniteEmitter }];
    let std = |label: String| CoreVertex { label, kind: VertexKind::Standard };
    for l in &input.a_labels {
        verts.push(std(format!("a[{l}]")));
    }
    // Core index of each b-gadget vertex.
    let mut heads = Vec::new();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (j, b) in input.b.iter().enumerate() {
        heads.push(verts.len());
        verts.push(std(format!("z{j}")));
        let has = |sign: i32| b.iter().any(|c| c.signum() == BigInt::from(sign));
        plus.push(has(1).then(|| {
            verts.push(std(format!("z{j}+")));
            verts.len() - 1
        }));
        minus.push(has(-1).then(|| {
            verts.push(std(format!("z{j}-")));
            verts.len() - 1
        }));
    }
    let mut g = GadgetGraph::new(GraphFamily::Realization, verts);
    let v = 0;
    let a_vertex = |a: usize| 1 + a;
    for a in 0..n {
        g.add_edge(a_vertex(a), a_vertex(a), 1);
        g.add_edge(a_vertex(a), v, 1);
    }
    let mult = |c: &BigInt| -> Result<u64> {
        u64::try_from(c.abs()).map_err(|_| Error::InvalidGraphInput("edge multiplicity too large".into()))
    };
    for (j, b) in input.b.iter().enumerate() {
        let z = heads[j];
        g.add_edge(z, v, 1);
        if let Some(zp) = plus[j] {
            g.add_edge(z, zp, 1);
            g.add_edge(zp, v, 1);
            for (a, c) in b.iter().enumerate() {
                if c.is_positive() {
                    g.add_edge(zp, a_vertex(a), mult(c)?);
                }
            }
        }
        if let Some(zm) = minus[j] {
            g.add_edge(z, zm, 1);
            g.add_edge(zm, zm, 2);
            g.add_edge(zm, v, 1);
            for (a, c) in b.iter().enumerate() {
                if c.is_negative() {
                    g.add_edge(zm, a_vertex(a), mult(c)?);
                }
            }
        }
    }
    g.add_ray(RaySpec::descending("c", v, false));
    for a in 0..n {
        g.add_ray(RaySpec::ascending(format!("x[{}]", input.a_labels[a]), a_vertex(a)));
    }
    for (j, &head) in heads.iter().enumerate() {
        g.add_ray(RaySpec::descending(format!("y{j}"), head, true));
    }
    // Automorphism: v and the c-ray fixed, gadgets permuted.
    let mut sigma: Vec<usize> = (0..g.vertices.len()).collect();
    let mut ray_sigma: Vec<usize> = (0..g.rays.len()).collect();
    for a in 0..n {
        sigma[a_vertex(a)] = a_vertex(input.a_perm[a]);
        ray_sigma[1 + a] = 1 + input.a_perm[a];
    }
    for j in 0..input.b.len() {
        let k = input.b_perm[j];
        sigma[heads[j]] = heads[k];
        if let (Some(x), Some(y)) = (plus[j], plus[k]) {
            sigma[x] = y;
        }
        if let (Some(x), Some(y)) = (minus[j], minus[k]) {
            sigma[x] = y;
        }
        ray_sigma[1 + n + j] = 1 + n + k;
    }
    g.sigma = sigma;
    g.ray_sigma = ray_sigma;
    validate_automorphism(&g)?;
    Ok(g)
}

/// Core vertex of `a ∈ A` in a graph from [`build_spielberg`].
pub fn a_vertex(a: usize) -> usize {
    1 + a
}

/// A center infinite emitter `w` with `m` descending strands `x_{i,·}`; strands
/// `cycled_from..m` are permuted cyclically, the others fixed.
pub fn build_strand_graph(m: usize, cycled_from: usize) -> Result<GadgetGraph> {
    if m == 0 {
        return Err(Error::Precondition("a strand graph needs at least one strand".into()));
    }
    if cycled_from > m {
        return Err(Error::Precondition(format!("cycle start {cycled_from} exceeds {m} strands")));
    }
    let mut g = GadgetGraph::new(GraphFamily::Strand, vec![CoreVertex { label: "w".into(), kind: VertexKind::InfiniteEmitter }]);
    for i in 0..m {
        g.add_ray(RaySpec::descending(format!("x{i}"), 0, false));
    }
    let len = m - cycled_from;
    for i in cycled_from..m {
        g.ray_sigma[i] = cycled_from + (i - cycled_from + 1) % len;
    }
    validate_automorphism(&g)?;
    Ok(g)
}

/// Removes strand `idx`, which must be fixed by the automorphism.
pub fn delete_strand(g: &GadgetGraph, idx: usize) -> Result<GadgetGraph> {
    if g.family != GraphFamily::Strand {
        return Err(Error::Precondition("not a strand graph".into()));
    }
    if idx >= g.rays.len() {
        return Err(Error::Precondition(format!("no strand {idx}")));
    }
    if g.ray_sigma[idx] != idx {
        return Err(Error::AutomorphismViolation(format!("strand {idx} is moved by the automorphism")));
    }
    let mut h = g.clone();
    h.rays.remove(idx);
    h.ray_sigma = g
        .ray_sigma
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, &j)| if j > idx { j - 1 } else { j })
        .collect();
    Ok(h)
}

/// Graphviz rendering of the depth-`L` instantiation.
pub fn to_dot(g: &GadgetGraph, depth: usize) -> Result<String> {
    let mat = g.materialize(depth)?;
    let mut out = String::from("digraph E {\n");
    for (i, &id) in mat.ids.iter().enumerate() {
        let shape = if mat.emitters[i] {
            "doublecircle"
        } else if mat.boundary[i] {
            "box"
        } else {
            "circle"
        };
        writeln!(out, "  n{i} [label=\"{}\", shape={shape}];", g.label(id)).expect("string write");
    }
    for (&(a, b), &m) in &mat.edges {
        if m == 1 {
            writeln!(out, "  n{a} -> n{b};").expect("string write");
        } else {
            writeln!(out, "  n{a} -> n{b} [label=\"x{m}\"];").expect("string write");
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// The `Z^2` swap input: `A` the two standard basis vectors, `B` empty.
pub fn z2_swap_input() -> Result<GraphSpecInput> {
    let swap = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    let g = FinMod::new(2, Lattice::zero(2), swap)?;
    let e = |i: usize| {
        let mut v = vec![BigInt::zero(); 2];
        v[i] = BigInt::one();
        v
    };
    GraphSpecInput::new(g, vec!["e1".into(), "e2".into()], vec![1, 0], vec![e(0), e(1)], vec![])
}

/// Kernel of `π: Z^A -> G` for an input, used to cross-check `B`.
pub fn kernel_of_pi(input: &GraphSpecInput) -> Lattice {
    let pi = IntMatrix::from_cols(&input.pi0, input.group.rank());
    input.group.relations().preimage(&pi)
}
