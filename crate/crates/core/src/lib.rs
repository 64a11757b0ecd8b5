//! Exact-arithmetic workbench for modules over the integral group ring of a
//! cyclic group of prime order, their presentations by generalized lattices,
//! and graphs whose K-theory realizes a prescribed prime-order automorphism.

pub mod cli;
pub mod cyclo_ring;
pub mod error;
pub mod graphkit;
pub mod intlinalg;
pub mod ktheory;
pub mod lattice_props;
pub mod presentation;
pub mod zmod;

pub use error::{Error, Result};

/// Trial-division primality; inputs here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: usize) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::NotPrime(p as u64))
    }
}
