//! Adaptive integration of `psi'' = a(x) psi' + b(x) psi`.
//!
//! The stationary Schrodinger equation `-psi''/2 + V psi = E psi` is the case
//! `a = 0`, `b = 2 (V - E)`. The stepper is Dormand-Prince 5(4) with local
//! extrapolation. Accepted knots are stored; values between knots are obtained
//! by one extra step from the nearest knot, whose length never exceeds the
//! accepted step there, so the interpolation error stays within the step error.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Default local error tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `(psi, psi')` at a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub value: Complex64,
    pub derivative: Complex64,
    pub x: f64,
}

impl StateVector {
    pub fn new(value: Complex64, derivative: Complex64, x: f64) -> Self {
        StateVector { value, derivative, x }
    }

    pub fn real(value: f64, derivative: f64, x: f64) -> Self {
        StateVector { value: value.into(), derivative: derivative.into(), x }
    }

    pub fn conj(&self) -> Self {
        StateVector { value: self.value.conj(), derivative: self.derivative.conj(), x: self.x }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        StateVector { value: self.value * s, derivative: self.derivative * s, x: self.x }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.derivative.is_finite()
    }

    /// Probability current `(psi* psi' - psi*' psi) / 2i`.
    pub fn current(&self) -> f64 {
        (self.value.conj() * self.derivative).im
    }
}

/// `w = f g' - g f'`.
pub fn wronskian_of(f: &StateVector, g: &StateVector) -> Complex64 {
    f.value * g.derivative - g.value * f.derivative
}

/// Coefficient callback returning `(a(x), b(x))`.
pub type Coefficients = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Coefficients of the Schrodinger equation for a potential callback.
pub fn schrodinger<V>(potential: V, energy: f64) -> Coefficients
where
    V: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(move |x| (0.0, 2.0 * (potential(x) - energy)))
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Several solutions of the same linear equation sharing one step sequence.
#[derive(Clone)]
pub struct DenseSystem {
    coeffs: Coefficients,
    count: usize,
    // ascending positions
    knots: Vec<f64>,
    // `count` (value, derivative) pairs per knot, flattened
    states: Vec<Complex64>,
    steps: usize,
    evaluations: usize,
    tol: f64,
}

impl fmt::Debug for DenseSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseSystem")
            .field("count", &self.count)
            .field("interval", &self.interval())
            .field("steps", &self.steps)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

fn derivative(coeffs: &Coefficients, x: f64, y: &[Complex64], out: &mut [Complex64]) {
    let (a, b) = coeffs(x);
    for (yi, oi) in y.chunks_exact(2).zip(out.chunks_exact_mut(2)) {
        oi[0] = yi[1];
        oi[1] = yi[1] * a + yi[0] * b;
    }
}

struct Workspace {
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace { k: core::array::from_fn(|_| alloc::vec![Complex64::zero(); n]), tmp: alloc::vec![Complex64::zero(); n] }
    }
}

/// One Dormand-Prince step. `ws.k[0]` must hold `f(x, y)` on entry. Writes the
/// fifth-order result into `out`; returns the scaled error norm.
fn dp_step(
    coeffs: &Coefficients,
    x: f64,
    h: f64,
    y: &[Complex64],
    out: &mut [Complex64],
    ws: &mut Workspace,
    tol: f64,
) -> f64 {
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = Complex64::zero();
            for (j, a) in A[s][..s].iter().enumerate() {
                if *a != 0.0 {
                    acc += ws.k[j][i] * *a;
                }
            }
            ws.tmp[i] = y[i] + acc * h;
        }
        let (head, tail) = ws.k.split_at_mut(s);
        let _ = head;
        derivative(coeffs, x + C[s] * h, &ws.tmp, &mut tail[0]);
    }
    // stage 6 argument equals the fifth-order solution (FSAL)
    out.copy_from_slice(&ws.tmp);
    let mut err: f64 = 0.0;
    for i in 0..n {
        let mut e = Complex64::zero();
        for s in 0..7 {
            let d = B5[s] - B4[s];
            if d != 0.0 {
                e += ws.k[s][i] * d;
            }
        }
        let scale = tol * (1.0 + y[i].norm().max(out[i].norm()));
        err = err.max((e * h).norm() / scale);
    }
    err
}

/// Integrates `inits` (given at `x_start`) to `x_end`, which may lie on either side.
pub fn integrate_system(
    coeffs: Coefficients,
    x_start: f64,
    x_end: f64,
    inits: &[(Complex64, Complex64)],
    tol: f64,
) -> Result<DenseSystem> {
    if !(tol > 0.0) || !x_start.is_finite() || !x_end.is_finite() {
        return Err(Error::InvalidSpec("integration needs finite bounds and tol > 0".into()));
    }
    let count = inits.len();
    let n = 2 * count;
    let mut y: Vec<Complex64> = inits.iter().flat_map(|(v, d)| [*v, *d]).collect();
    if y.iter().any(|z| !z.is_finite()) {
        return Err(Error::IntegrationFailed { x: x_start, reason: "non-finite initial state" });
    }
    let span = x_end - x_start;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut knots = alloc::vec![x_start];
    let mut states = y.clone();
    let mut steps = 0;
    let mut evaluations = 1;

    if span != 0.0 {
        let mut ws = Workspace::new(n);
        let mut out = alloc::vec![Complex64::zero(); n];
        derivative(&coeffs, x_start, &y, &mut ws.k[0]);
        let mut x = x_start;
        let mut h = dir * span.abs().min(0.05);
        let h_min = 1e-13 * span.abs().max(x_start.abs());
        loop {
            let remaining = x_end - x;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let err = dp_step(&coeffs, x, h, &y, &mut out, &mut ws, tol);
            evaluations += 6;
            if !err.is_finite() {
                if h.abs() <= h_min {
                    return Err(Error::IntegrationFailed { x, reason: "non-finite state" });
                }
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                x = if last { x_end } else { x + h };
                y.copy_from_slice(&out);
                knots.push(x);
                states.extend_from_slice(&y);
                steps += 1;
                ws.k.swap(0, 6);
                if last {
                    break;
                }
            } else if h.abs() <= h_min {
                return Err(Error::IntegrationFailed { x, reason: "step size underflow" });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        }
    }

    if dir < 0.0 {
        knots.reverse();
        let mut rev = Vec::with_capacity(states.len());
        for chunk in states.chunks_exact(n).rev() {
            rev.extend_from_slice(chunk);
        }
        states = rev;
    }
    Ok(DenseSystem { coeffs, count, knots, states, steps, evaluations, tol })
}

impl DenseSystem {
    pub fn interval(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Accepted steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Right-hand-side evaluations.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    fn knot_state(&self, k: usize) -> &[Complex64] {
        let n = 2 * self.count;
        &self.states[k * n..(k + 1) * n]
    }

    /// All solutions at `x`, flattened as `(value, derivative)` pairs.
    pub fn eval_raw(&self, x: f64) -> Result<Vec<Complex64>> {
        let (lo, hi) = self.interval();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let k = match self.knots.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(k) => return Ok(self.knot_state(k).to_vec()),
            Err(k) => {
                // k is the insertion index, so knots[k-1] < x < knots[k]
                if k == 0 {
                    0
                } else if k >= self.knots.len() || x - self.knots[k - 1] <= self.knots[k] - x {
                    k - 1
                } else {
                    k
                }
            }
        };
        let y0 = self.knot_state(k);
        let n = y0.len();
        let mut ws = Workspace::new(n);
        let mut out = alloc::vec![Complex64::zero(); n];
        derivative(&self.coeffs, self.knots[k], y0, &mut ws.k[0]);
        dp_step(&self.coeffs, self.knots[k], x - self.knots[k], y0, &mut out, &mut ws, self.tol);
        Ok(out)
    }

    /// Solution `i` at `x`.
    pub fn eval(&self, i: usize, x: f64) -> Result<StateVector> {
        let raw = self.eval_raw(x)?;
        Ok(StateVector::new(raw[2 * i], raw[2 * i + 1], x))
    }

    /// Final state of every solution in integration order: at `x_end`.
    pub fn end_states(&self, forward: bool) -> Vec<StateVector> {
        let k = if forward { self.knots.len() - 1 } else { 0 };
        let x = self.knots[k];
        self.knot_state(k).chunks_exact(2).map(|c| StateVector::new(c[0], c[1], x)).collect()
    }
}

/// Two linearly independent solutions over one cell.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub energy: f64,
    pub init: [StateVector; 2],
    system: DenseSystem,
}

/// Integrates the basis pair `init1`, `init2` (given at `interval.0`) across
/// the interval for the potential callback.
pub fn integrate_cell<V>(
    potential: V,
    energy: f64,
    interval: (f64, f64),
    init1: StateVector,
    init2: StateVector,
    tol: f64,
) -> Result<CellBasis>
where
    V: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::InvalidSpec("cell interval must have positive length".into()));
    }
    let w = wronskian_of(&init1, &init2);
    let scale = (init1.value.norm() + init1.derivative.norm()) * (init2.value.norm() + init2.derivative.norm());
    if !(w.norm() > 1e-14 * scale) {
        return Err(Error::LinearlyDependentInit);
    }
    let system = integrate_system(
        schrodinger(potential, energy),
        lo,
        hi,
        &[(init1.value, init1.derivative), (init2.value, init2.derivative)],
        tol,
    )?;
    let init = [StateVector { x: lo, ..init1 }, StateVector { x: lo, ..init2 }];
    Ok(CellBasis { energy, init, system })
}

/// Basis over cell `l` of domain `d` with the default initial conditions
/// `(1, 0)` and `(0, 1)` at the left cell edge.
pub fn integrate_potential_cell(p: &PotentialSpec, d: usize, l: usize, energy: f64, tol: f64) -> Result<CellBasis> {
    let view = p.cell_view(d, l)?;
    let (lo, hi) = (view.lo, view.hi);
    integrate_cell(
        move |x| view.eval(x),
        energy,
        (lo, hi),
        StateVector::real(1.0, 0.0, lo),
        StateVector::real(0.0, 1.0, lo),
        tol,
    )
}

impl CellBasis {
    pub fn interval(&self) -> (f64, f64) {
        self.system.interval()
    }

    pub fn steps(&self) -> usize {
        self.system.steps()
    }

    pub fn system(&self) -> &DenseSystem {
        &self.system
    }

    /// `(phi_1(x), phi_2(x))` with derivatives.
    pub fn eval(&self, x: f64) -> Result<(StateVector, StateVector)> {
        let raw = self.system.eval_raw(x)?;
        Ok((StateVector::new(raw[0], raw[1], x), StateVector::new(raw[2], raw[3], x)))
    }

    pub fn wronskian(&self, x: f64) -> Result<Complex64> {
        let (a, b) = self.eval(x)?;
        Ok(wronskian_of(&a, &b))
    }
}

pub fn eval_basis(b: &CellBasis, x: f64) -> Result<(StateVector, StateVector)> {
    b.eval(x)
}

pub fn wronskian(b: &CellBasis, x: f64) -> Result<Complex64> {
    b.wronskian(x)
}

/// Solutions integrated across a run of consecutive cells, one piece per cell.
#[derive(Debug, Clone)]
pub struct Sweep {
    pieces: Vec<DenseSystem>,
}

/// Integrates `inits` through the listed cells in order. Cells must be
/// adjacent; for a backward sweep list them right to left with `inits` at the
/// right edge of the first one.
pub fn sweep_cells(
    p: &PotentialSpec,
    cells: &[(usize, usize)],
    energy: f64,
    inits: &[StateVector],
    tol: f64,
    backward: bool,
) -> Result<Sweep> {
    let mut state: Vec<(Complex64, Complex64)> = inits.iter().map(|s| (s.value, s.derivative)).collect();
    let mut pieces = Vec::with_capacity(cells.len());
    for &(d, l) in cells {
        let view = p.cell_view(d, l)?;
        let (lo, hi) = (view.lo, view.hi);
        let (from, to) = if backward { (hi, lo) } else { (lo, hi) };
        let sys = integrate_system(schrodinger(move |x| view.eval(x), energy), from, to, &state, tol)?;
        state = sys.end_states(!backward).iter().map(|s| (s.value, s.derivative)).collect();
        pieces.push(sys);
    }
    if !backward {
        Ok(Sweep { pieces })
    } else {
        pieces.reverse();
        Ok(Sweep { pieces })
    }
}

impl Sweep {
    pub fn interval(&self) -> (f64, f64) {
        (self.pieces[0].interval().0, self.pieces[self.pieces.len() - 1].interval().1)
    }

    pub fn steps(&self) -> usize {
        self.pieces.iter().map(DenseSystem::steps).sum()
    }

    pub fn pieces(&self) -> &[DenseSystem] {
        &self.pieces
    }

    /// Solution `i` at `x`; at a shared cell edge the left piece is used.
    pub fn eval(&self, i: usize, x: f64) -> Result<StateVector> {
        let (lo, hi) = self.interval();
        let piece = self
            .pieces
            .iter()
            .find(|s| x <= s.interval().1)
            .filter(|_| x >= lo)
            .ok_or(Error::OutOfRange { x, lo, hi })?;
        piece.eval(i, x)
    }
}
