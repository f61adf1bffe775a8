//! Geodesic flags, volume asymptotics and exact binomial and Hilbert identities for
//! affine control systems declared symbolically in a chart.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod exact;
pub mod expr;
pub mod flag;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
mod math;
pub mod ode;
pub mod rho;
pub mod series;

pub use error::{Error, Result};
pub use expr::Expr;
pub use geometry::{ControlSystem, VectorField};
pub use hamiltonian::PhasePoint;
