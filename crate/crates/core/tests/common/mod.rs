#![allow(dead_code)]

use lsbwave_core::integrator::{sweep_cells, Sweep};
use lsbwave_core::{CellProfile, DomainSpec, PotentialSpec, StateVector};

/// Gaussian pair mirrored about 2 followed by an `n`-cell cosine lattice.
pub fn pair_and_lattice(n: usize) -> PotentialSpec {
    let pair = DomainSpec::inversion(0.0, 4.0, CellProfile::Gaussian { height: 1.2, center: 1.1, width: 0.35 }).unwrap();
    let lattice = DomainSpec::translation(
        4.0,
        4.0 + n as f64,
        n,
        CellProfile::Cosine { amplitude: 0.6, period: 1.0, phase: 0.4, offset: 0.3 },
    )
    .unwrap();
    PotentialSpec::new(vec![pair, lattice], 0.0, 0.0).unwrap()
}

/// Pair, lattice and an asymmetric ramp with unequal leads.
pub fn pair_lattice_ramp(n: usize) -> PotentialSpec {
    let mut doms = pair_and_lattice(n).domains().to_vec();
    let end = 4.0 + n as f64;
    doms.push(DomainSpec::asymmetric(end, end + 1.5, CellProfile::Linear { intercept: 0.5 - 0.4 * end, slope: 0.4 }).unwrap());
    PotentialSpec::new(doms, 0.0, 0.1).unwrap()
}

/// Two cosine lattices separated by a single asymmetric defect cell.
pub fn lattice_defect_lattice(n: usize) -> PotentialSpec {
    let prof = CellProfile::Cosine { amplitude: 0.8, period: 0.8, phase: 0.0, offset: 0.0 };
    let a = 0.8 * n as f64;
    let left = DomainSpec::translation(0.0, a, n, prof.clone()).unwrap();
    let defect = DomainSpec::asymmetric(a, a + 0.8, CellProfile::Gaussian { height: 1.5, center: a + 0.5, width: 0.15 }).unwrap();
    let prof_right = CellProfile::Cosine { amplitude: 0.8, period: 0.8, phase: 0.0, offset: 0.0 };
    let right = DomainSpec::translation(a + 0.8, 2.0 * a + 0.8, n, prof_right).unwrap();
    PotentialSpec::new(vec![left, defect, right], 0.0, 0.0).unwrap()
}

/// Single cosine lattice with `n` unit cells.
pub fn lattice(n: usize, amplitude: f64) -> PotentialSpec {
    let prof = CellProfile::Cosine { amplitude, period: 1.0, phase: 0.0, offset: 0.0 };
    PotentialSpec::new(vec![DomainSpec::translation(0.0, n as f64, n, prof).unwrap()], 0.0, 0.0).unwrap()
}

pub fn square_well(depth: f64) -> PotentialSpec {
    PotentialSpec::new(
        vec![
            DomainSpec::asymmetric(-2.0, -1.0, CellProfile::Constant(0.0)).unwrap(),
            DomainSpec::inversion(-1.0, 1.0, CellProfile::Constant(-depth)).unwrap(),
            DomainSpec::asymmetric(1.0, 2.0, CellProfile::Constant(0.0)).unwrap(),
        ],
        0.0,
        0.0,
    )
    .unwrap()
}

pub fn suite() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        ("pair+lattice", pair_and_lattice(8)),
        ("pair+lattice+ramp", pair_lattice_ramp(5)),
        ("lattice+defect+lattice", lattice_defect_lattice(4)),
        ("square well", square_well(2.0)),
        ("lattice", lattice(6, 1.5)),
    ]
}

/// Default basis of domain `d` integrated cell by cell through the whole domain.
pub fn domain_sweep(p: &PotentialSpec, d: usize, energy: f64, tol: f64) -> Sweep {
    let dom = p.domain(d).unwrap();
    let cells: Vec<_> = (1..=dom.cells).map(|l| (d, l)).collect();
    let inits = [StateVector::real(1.0, 0.0, dom.start), StateVector::real(0.0, 1.0, dom.start)];
    sweep_cells(p, &cells, energy, &inits, tol, false).unwrap()
}

/// Sample points `x` of domain `d` whose image `F(x)` stays inside the domain.
pub fn pair_points(p: &PotentialSpec, d: usize, n: usize) -> Vec<(f64, f64)> {
    let dom = p.domain(d).unwrap();
    let (lo, hi) = match dom.transform.kind {
        lsbwave_core::SymmetryKind::Inversion => (dom.start, dom.transform.alpha),
        _ => dom.transform_region(),
    };
    (0..n)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            (x, dom.transform.apply(x).unwrap())
        })
        .collect()
}

/// Two solutions integrated cell by cell across the whole potential from `x_0`.
pub fn full_sweep(p: &PotentialSpec, energy: f64, inits: &[StateVector; 2]) -> Sweep {
    let cells: Vec<_> = p
        .domains()
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (1..=d.cells).map(move |l| (i + 1, l)))
        .collect();
    sweep_cells(p, &cells, energy, inits, 1e-11, false).unwrap()
}
