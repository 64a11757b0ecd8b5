//! Python bindings: modules over `Z[C_p]`, inclusions, and realization graphs.

use ::cyclat as core;
use core::error::Error;
use core::graphkit::{build_spielberg, build_strand_graph, delete_strand, to_dot, GadgetGraph, GraphSpecInput};
use core::ktheory::{compute_k, induced_action, stabilization_check, verify_theorem_2_1};
use core::lattice_props::{check_lemma_1_7, check_t_condition, find_equivariant_projection, impurity_witness, InclusionPair};
use core::presentation::{build_aug, find_invariant_basis, SearchOptions};
use core::zmod::{build, FinMod, ModSpec};
use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    match e {
        Error::Internal(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

type Witness = (Vec<BigInt>, Vec<BigInt>, Vec<BigInt>);

fn opts(seed: u64, kmax: usize) -> SearchOptions {
    SearchOptions { seed, kmax, ..SearchOptions::default() }
}

/// A finite module given by a spec such as `"cyclicR(2,1) + triv(3)"`.
#[pyclass(name = "Module", frozen)]
struct PyModuleSpec {
    inner: FinMod,
}

#[pymethods]
impl PyModuleSpec {
    #[new]
    #[pyo3(signature = (spec, p=2))]
    fn new(spec: &str, p: usize) -> PyResult<Self> {
        let s = ModSpec::parse(spec).map_err(err)?;
        Ok(PyModuleSpec { inner: build(&s, p).map_err(err)? })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    fn order(&self) -> Option<BigInt> {
        self.inner.order()
    }

    fn elements(&self) -> PyResult<Vec<Vec<BigInt>>> {
        self.inner.enumerate().map_err(err)
    }

    fn action_order(&self) -> usize {
        self.inner.action_order()
    }

    /// Rank of `N_M` inside `Z M`.
    fn presentation_rank(&self) -> PyResult<usize> {
        Ok(build_aug(&self.inner).map_err(err)?.n.rank())
    }

    fn is_noncyclotomic(&self) -> PyResult<bool> {
        Ok(build_aug(&self.inner).map_err(err)?.mod_lattice().is_noncyclotomic())
    }

    /// `{"k", "method", "orbits", "fixed"}` for an invariant basis of `N_M ⊕ R^k`.
    #[pyo3(signature = (seed=0, kmax=3))]
    fn invariant_basis<'py>(&self, py: Python<'py>, seed: u64, kmax: usize) -> PyResult<Bound<'py, PyDict>> {
        let pres = build_aug(&self.inner).map_err(err)?;
        let found = find_invariant_basis(&pres, true, &opts(seed, kmax)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("k", found.k)?;
        d.set_item("method", format!("{:?}", found.method))?;
        d.set_item("orbits", found.basis.orbits.clone())?;
        d.set_item("fixed", found.basis.fixed.clone())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let spec = self.inner.spec().map(ToString::to_string).unwrap_or_else(|| "<module>".into());
        format!("Module('{spec}', p={})", self.inner.p())
    }
}

/// A submodule `M0 ⊆ M` named (`"t"`, `"fixed"`, `"all"`, `"zero"`) or given by generators.
#[pyclass(name = "Inclusion", frozen)]
struct PyInclusion {
    inner: InclusionPair,
}

#[pymethods]
impl PyInclusion {
    #[new]
    #[pyo3(signature = (module, sub=None, gens=None))]
    fn new(module: &PyModuleSpec, sub: Option<&str>, gens: Option<Vec<Vec<BigInt>>>) -> PyResult<Self> {
        let m = &module.inner;
        let lattice = match (sub, gens) {
            (Some("t"), None) => m.t_image(),
            (Some("fixed"), None) => m.fixed_submodule(),
            (Some("all"), None) => core::intlinalg::Lattice::full(m.rank()),
            (Some("zero"), None) => m.relations().clone(),
            (None, Some(g)) => m.submodule_generated(&g).map_err(err)?,
            _ => return Err(PyValueError::new_err("give exactly one of sub in {t, fixed, all, zero} or gens")),
        };
        Ok(PyInclusion { inner: InclusionPair::new(m, lattice).map_err(err)? })
    }

    fn sub_order(&self) -> usize {
        self.inner.sub_indices.len()
    }

    /// `(tM) ∩ M0 = tM0`.
    fn t_condition(&self) -> PyResult<bool> {
        Ok(check_t_condition(&self.inner).map_err(err)?.holds)
    }

    fn lattice_identity(&self) -> PyResult<bool> {
        Ok(check_lemma_1_7(&self.inner).map_err(err)?.holds)
    }

    /// `(z, xi, s_xi)` when the condition fails, else `None`.
    fn impurity_witness(&self) -> PyResult<Option<Witness>> {
        Ok(impurity_witness(&self.inner).map_err(err)?.map(|w| (w.z, w.xi, w.s_xi)))
    }

    fn has_equivariant_projection(&self) -> PyResult<bool> {
        Ok(find_equivariant_projection(&self.inner.n(), &self.inner.n0).map_err(err)?.is_some())
    }
}

/// A gadget graph: the realization graph of a module or a strand graph.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: GadgetGraph,
    input: Option<GraphSpecInput>,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    #[pyo3(signature = (module, seed=0, kmax=3))]
    fn realization(module: &PyModuleSpec, seed: u64, kmax: usize) -> PyResult<Self> {
        let input = GraphSpecInput::from_module(&module.inner, &opts(seed, kmax)).map_err(err)?;
        Ok(PyGraph { inner: build_spielberg(&input).map_err(err)?, input: Some(input) })
    }

    #[staticmethod]
    #[pyo3(signature = (m, cycled_from=None, delete=None))]
    fn strand(m: usize, cycled_from: Option<usize>, delete: Option<usize>) -> PyResult<Self> {
        let mut g = build_strand_graph(m, cycled_from.unwrap_or(m)).map_err(err)?;
        if let Some(i) = delete {
            g = delete_strand(&g, i).map_err(err)?;
        }
        Ok(PyGraph { inner: g, input: None })
    }

    fn vertex_count(&self, depth: usize) -> usize {
        self.inner.vertex_count(depth)
    }

    /// `(K0 description, K1 rank)`.
    #[pyo3(signature = (depth=3))]
    fn k_theory(&self, depth: usize) -> PyResult<(String, usize)> {
        let kr = compute_k(&self.inner, depth).map_err(err)?;
        Ok((kr.k0.describe(), kr.k1_rank()))
    }

    /// Matrix of the automorphism on `K1`, rows as lists.
    #[pyo3(signature = (depth=3))]
    fn k1_action(&self, depth: usize) -> PyResult<Vec<Vec<BigInt>>> {
        let kr = induced_action(&self.inner, compute_k(&self.inner, depth).map_err(err)?).map_err(err)?;
        Ok(kr.induced_k1.map(|m| m.row_vecs()).unwrap_or_default())
    }

    #[pyo3(signature = (depths=vec![2, 3, 4]))]
    fn is_stable(&self, depths: Vec<usize>) -> PyResult<bool> {
        Ok(stabilization_check(&self.inner, &depths).map_err(err)?.stable)
    }

    /// List of failed properties; empty when every property holds.
    #[pyo3(signature = (depth=3))]
    fn verify(&self, depth: usize) -> PyResult<Vec<String>> {
        let input = self.input.as_ref().ok_or_else(|| PyValueError::new_err("not a realization graph"))?;
        Ok(verify_theorem_2_1(&self.inner, input, depth).map_err(err)?.failures)
    }

    #[pyo3(signature = (depth=2))]
    fn dot(&self, depth: usize) -> PyResult<String> {
        to_dot(&self.inner, depth).map_err(err)
    }
}

/// `{"h", "f", "g"}` as coefficient lists, lowest degree first.
#[pyfunction]
fn ring_identities(py: Python<'_>, p: usize) -> PyResult<Bound<'_, PyDict>> {
    let l = core::cyclo_ring::solve_lemma_1_11(p).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("h", l.h.coeffs().to_vec())?;
    d.set_item("f", l.f.coeffs().to_vec())?;
    d.set_item("g", l.g.coeffs().to_vec())?;
    Ok(d)
}

/// Invariant factors (unit factors dropped) and free rank of `Z^rows / im A`.
#[pyfunction]
fn cokernel(rows: Vec<Vec<BigInt>>) -> PyResult<(Vec<BigInt>, usize)> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    let m = core::intlinalg::IntMatrix::from_rows(rows, cols);
    let (factors, free) = core::intlinalg::cokernel_invariants(&m);
    Ok((core::intlinalg::nontrivial(&factors), free))
}

#[pymodule]
pub fn cyclat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModuleSpec>()?;
    m.add_class::<PyInclusion>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(ring_identities, m)?)?;
    m.add_function(wrap_pyfunction!(cokernel, m)?)?;
    Ok(())
}
