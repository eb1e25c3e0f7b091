//! Reference solvers independent of the symmetry machinery.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrator::{sweep_cells, StateVector};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub energy: f64,
    pub transmittance: f64,
    pub reflectance: f64,
    pub r: Complex64,
    pub t: Complex64,
    /// `(x, psi)` for unit incident amplitude from the left.
    pub samples: Vec<(f64, Complex64)>,
    /// Integration steps (zero for closed-form results).
    pub steps: usize,
}

fn wavenumber(energy: f64, lead: f64) -> Result<f64> {
    if energy > lead {
        Ok((2.0 * (energy - lead)).sqrt())
    } else {
        Err(Error::ClosedChannel { energy, lead })
    }
}

/// `(a_+, a_-)` of `a_+ e^{ikx} + a_- e^{-ikx}` at its reference point.
fn split(value: Complex64, derivative: Complex64, k: f64) -> (Complex64, Complex64) {
    let d = derivative / Complex64::new(0.0, k);
    ((value + d) / 2.0, (value - d) / 2.0)
}

fn finish(energy: f64, kl: f64, kr: f64, at_start: (Complex64, Complex64), samples: Vec<(f64, Complex64)>, steps: usize) -> Result<OracleResult> {
    let (ap, am) = split(at_start.0, at_start.1, kl);
    if !(ap.norm() > 0.0) || !ap.is_finite() {
        return Err(Error::SingularSystem("oracle incident amplitude"));
    }
    let t = 1.0 / ap;
    let r = am / ap;
    let samples = samples.into_iter().map(|(x, v)| (x, v * t)).collect();
    Ok(OracleResult {
        energy,
        transmittance: kr / kl * t.norm_sqr(),
        reflectance: r.norm_sqr(),
        r,
        t,
        samples,
        steps,
    })
}

/// Integrates once across the whole potential, from the transmitted wave
/// `e^{ik(x - x_N)}` at `x_N` back to `x_0`.
pub fn direct_scatter(p: &PotentialSpec, energy: f64, tol: f64) -> Result<OracleResult> {
    let kl = wavenumber(energy, p.lead_left)?;
    let kr = wavenumber(energy, p.lead_right)?;
    let mut cells: Vec<(usize, usize)> = p
        .domains()
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (1..=d.cells).map(move |l| (i + 1, l)))
        .collect();
    cells.reverse();
    let init = StateVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, kr), p.x_end());
    let sweep = sweep_cells(p, &cells, energy, &[init], tol, true)?;
    let mut samples = Vec::new();
    for piece in sweep.pieces() {
        for &x in piece.knots() {
            if samples.last().map_or(true, |&(y, _)| y < x) {
                samples.push((x, piece.eval(0, x)?.value));
            }
        }
    }
    let start = sweep.eval(0, p.x_start())?;
    finish(energy, kl, kr, (start.value, start.derivative), samples, sweep.steps())
}

/// Exact propagation of `(psi, psi')` across a constant piece.
fn constant_step(value: f64, energy: f64, width: f64, state: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let q = Complex64::new(2.0 * (value - energy), 0.0);
    let s = q.sqrt();
    let (c, sinc, s_sinh) = if (s * width).norm() < 1e-4 {
        // series of cosh(sw), sinh(sw)/s and s sinh(sw)
        let qw2 = q * width * width;
        (
            1.0 + qw2 / 2.0 + qw2 * qw2 / 24.0,
            width * (1.0 + qw2 / 6.0 + qw2 * qw2 / 120.0),
            q * width * (1.0 + qw2 / 6.0 + qw2 * qw2 / 120.0),
        )
    } else {
        let arg = s * width;
        (arg.cosh(), arg.sinh() / s, s * arg.sinh())
    };
    (c * state.0 + sinc * state.1, s_sinh * state.0 + c * state.1)
}

/// Closed-form transmission through consecutive constant pieces `(width, value)`
/// between leads at potentials `leads = (left, right)`.
pub fn analytic_rectangular(pieces: &[(f64, f64)], leads: (f64, f64), energy: f64) -> Result<OracleResult> {
    if pieces.iter().any(|&(w, v)| !(w > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidSpec("oracle: piece widths must be positive and values finite".into()));
    }
    let kl = wavenumber(energy, leads.0)?;
    let kr = wavenumber(energy, leads.1)?;
    let total: f64 = pieces.iter().map(|p| p.0).sum();
    let mut x = total;
    let mut state = (Complex64::new(1.0, 0.0), Complex64::new(0.0, kr));
    let mut samples = Vec::with_capacity(pieces.len() + 1);
    samples.push((x, state.0));
    for &(w, v) in pieces.iter().rev() {
        state = constant_step(v, energy, -w, state);
        x -= w;
        samples.push((x, state.0));
    }
    samples.reverse();
    finish(energy, kl, kr, state, samples, 0)
}
