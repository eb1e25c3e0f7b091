//! Stationary 1D wave mechanics in potentials built from locally symmetric
//! domains.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`integrator`]: a pair of solutions is integrated over the first cell
//!    of every domain only.
//! 2. [`invariants`] and [`lsb`]: the two-point currents of that pair give a
//!    constant mapping matrix `Q` per domain, which is diagonalized into the
//!    local symmetry basis (LSB) `chi`.
//! 3. [`assembly`]: the LSBs are matched at the domain interfaces into a
//!    continuous global basis `xi`, with cells reached by eigenvalue powers.
//! 4. [`solver`]: boundary conditions are imposed on `psi = c . xi`.
//!
//! [`general`] holds two-point invariants for non-isometric transforms and
//! [`oracle`] holds the brute-force references the pipeline is checked
//! against.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod error;
pub mod general;
pub mod integrator;
pub mod invariants;
pub mod linalg;
pub mod lsb;
pub mod oracle;
pub mod potential;
pub mod solver;
mod spline;
#[cfg(test)]
mod testkit;

pub use assembly::{build_global_basis, GlobalBasis, MatchingMatrix};
pub use error::{Error, Result};
pub use general::{isometry_check, GeneralTransform};
pub use integrator::{integrate_cell, CellBasis, StateVector, DEFAULT_TOL};
pub use invariants::{MixedCurrents, QMatrix};
pub use lsb::{build_domain_lsb, Classification, DomainLsb, LsbTransform};
pub use num_complex::Complex64;
pub use potential::{CellProfile, DomainSpec, PotentialSpec, SymmetryKind, SymmetryTransform};
pub use solver::{BoundState, BoundaryCondition, Incoming, PureCurrents, ScatteringResult, SolveOptions};
