//! Exact integer linear algebra: normal forms, kernels, and lattices in `Z^n`.

mod hnf;
mod lattice;
mod matrix;
mod snf;

pub use hnf::{hnf, rank};
pub use lattice::{kernel_basis, quotient_invariants, solve_integer, Lattice, QuotientInvariants};
pub use matrix::{is_zero_vec, vec_add, vec_from_i64, vec_scale, vec_sub, IntMatrix, IntVec};
pub use snf::{cokernel_invariants, nontrivial, snf, SnfResult};
