//! Chernoff-iteration solver for the viscous Hamilton–Jacobi equation
//! `∂ₜu = ½Δu + H(∇u)` on exponential Orlicz hearts.
//!
//! The numerical routines are generic over [`Real`] (`f32` / `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the tolerances
//! in the test-suite are calibrated for.

pub mod error;
pub mod chernoff;
pub mod dominating;
pub mod grid;
pub mod hamiltonian;
pub mod kernel;
pub mod oracle;
pub mod orlicz;
pub mod regularity;
pub mod scalar;

pub use error::{Error, Result};
pub use grid::{GridFunction, GridSpec};
pub use hamiltonian::{ConjugateTable, ConjugateValue, Hamiltonian, HamiltonianKind, SampledTable};
pub use kernel::{brownian_tail, gauss_expectation, heat_step, GaussKernel, Stencil};
pub use scalar::Real;

pub type GridSpec64 = GridSpec<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type Hamiltonian64 = Hamiltonian<f64>;
