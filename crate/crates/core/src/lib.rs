//! First-order averaging for highly oscillatory systems of the form
//! `x' = Ω x + ε F(x, t)` with `Ω` skew-Hermitian.
//!
//! The crate provides the spectral machinery for `e^{Ωt}` ([`linear`]), numerical
//! time averages over periodic and quasi-periodic orbits ([`averaging`]), the classical
//! and improved averaged vector fields ([`averaged`]), fixed-step integrators
//! ([`integrators`]) and three worked model problems: a parametrically driven MEMS
//! resonator ([`cput`]), a stiff Fermi–Pasta–Ulam chain ([`fpu`]) and a nonlinear
//! transport equation on a periodic rectangle ([`wavebench`]).

pub mod averaged;
pub mod averaging;
pub mod cput;
mod error;
pub mod fpu;
pub mod integrators;
pub mod linear;
pub mod wavebench;

pub use error::{Error, Result};

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
