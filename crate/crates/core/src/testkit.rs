//! Potentials shared by unit tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::integrator::{sweep_cells, StateVector, Sweep};
use crate::potential::{CellProfile, DomainSpec, PotentialSpec};
use crate::Result;

/// Gaussian pair mirrored about 2, an `n`-cell cosine lattice on `[4, 4 + n]`,
/// and an asymmetric ramp of width 1.5.
pub fn cls(n: usize) -> PotentialSpec {
    let pair = DomainSpec::inversion(0.0, 4.0, CellProfile::Gaussian { height: 1.2, center: 1.1, width: 0.35 }).unwrap();
    let lattice = DomainSpec::translation(
        4.0,
        4.0 + n as f64,
        n,
        CellProfile::Cosine { amplitude: 0.6, period: 1.0, phase: 0.4, offset: 0.3 },
    )
    .unwrap();
    let end = 4.0 + n as f64;
    let ramp = DomainSpec::asymmetric(end, end + 1.5, CellProfile::Linear { intercept: 0.5 - 0.4 * end, slope: 0.4 }).unwrap();
    PotentialSpec::new(vec![pair, lattice, ramp], 0.0, 0.1).unwrap()
}

pub fn free_box(len: f64) -> PotentialSpec {
    PotentialSpec::new(vec![DomainSpec::asymmetric(0.0, len, CellProfile::Constant(0.0)).unwrap()], 0.0, 0.0).unwrap()
}

pub fn all_cells(p: &PotentialSpec) -> Vec<(usize, usize)> {
    p.domains().iter().enumerate().flat_map(|(i, d)| (1..=d.cells).map(move |l| (i + 1, l))).collect()
}

/// Forward dense integration of two solutions across the whole potential.
pub fn sweep_all(p: &PotentialSpec, energy: f64, inits: &[StateVector; 2]) -> Result<Sweep> {
    sweep_cells(p, &all_cells(p), energy, inits, 1e-11, false)
}
