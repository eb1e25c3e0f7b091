//! Physical solutions `psi = c1 xi_1 + c2 xi_2` from boundary conditions.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::assembly::GlobalBasis;
use crate::error::{Error, Result};
use crate::integrator::{StateVector, DEFAULT_TOL};
use crate::invariants::two_point_currents;
use crate::linalg::{solve, Mat2, Vec2};
use crate::lsb::build_domain_lsb_with_tol;
use crate::potential::PotentialSpec;

/// Settings shared by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Reference domain (1-based).
    pub reference: usize,
    pub tol: f64,
    /// Optional per-domain factors applied to the `chi_+`/`chi_-` rows.
    pub row_scales: Vec<(Complex64, Complex64)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { reference: 1, tol: DEFAULT_TOL, row_scales: Vec::new() }
    }
}

/// Global basis at `energy` built according to `opts`.
pub fn basis_at(p: &PotentialSpec, energy: f64, opts: &SolveOptions) -> Result<GlobalBasis> {
    let mut lsbs = (1..=p.num_domains())
        .map(|d| build_domain_lsb_with_tol(p, d, energy, opts.tol))
        .collect::<Result<Vec<_>>>()?;
    for (lsb, &(a, b)) in lsbs.iter_mut().zip(&opts.row_scales) {
        lsb.rescale_rows(a, b);
    }
    GlobalBasis::from_lsbs(p, lsbs, energy, opts.reference)
}

/// Incoming plane-wave amplitudes: `a_+` on the left, `a_-` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incoming {
    pub from_left: Complex64,
    pub from_right: Complex64,
}

impl Incoming {
    pub fn left() -> Self {
        Incoming { from_left: Complex64::new(1.0, 0.0), from_right: Complex64::new(0.0, 0.0) }
    }

    pub fn right() -> Self {
        Incoming { from_left: Complex64::new(0.0, 0.0), from_right: Complex64::new(1.0, 0.0) }
    }
}

/// Lead amplitudes and scattering coefficients.
///
/// Plane waves are referenced to the edges: `a_+ e^{ik(x-x_0)} + a_- e^{-ik(x-x_0)}`
/// on the left and the same with `x_N` on the right. `r`, `t` refer to
/// incidence from the left unless only a right amplitude is incoming.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub energy: f64,
    pub k_left: f64,
    pub k_right: f64,
    pub a_plus_left: Complex64,
    pub a_minus_left: Complex64,
    pub a_plus_right: Complex64,
    pub a_minus_right: Complex64,
    pub r: Complex64,
    pub t: Complex64,
    pub reflectance: f64,
    pub transmittance: f64,
    pub coefficients: Vec2,
}

impl ScatteringResult {
    /// `psi` at `x` from the basis the result was computed with.
    pub fn psi(&self, g: &GlobalBasis, x: f64) -> Result<StateVector> {
        let (a, b) = g.eval(x)?;
        Ok(combine_state(&self.coefficients, &a, &b))
    }
}

pub(crate) fn combine_state(c: &Vec2, a: &StateVector, b: &StateVector) -> StateVector {
    StateVector::new(c[0] * a.value + c[1] * b.value, c[0] * a.derivative + c[1] * b.derivative, a.x)
}

fn wavenumber(energy: f64, lead: f64) -> Result<f64> {
    if energy > lead {
        Ok((2.0 * (energy - lead)).sqrt())
    } else {
        Err(Error::ClosedChannel { energy, lead })
    }
}

/// `(a_+, a_-)` of a plane-wave pair from the value and derivative at the reference point.
fn split(s: &StateVector, k: f64) -> (Complex64, Complex64) {
    let d = s.derivative / Complex64::new(0.0, k);
    ((s.value + d) / 2.0, (s.value - d) / 2.0)
}

struct Edges {
    k_left: f64,
    k_right: f64,
    left: (StateVector, StateVector),
    right: (StateVector, StateVector),
}

fn edges(g: &GlobalBasis) -> Result<Edges> {
    let (ll, lr) = g.leads();
    let k_left = wavenumber(g.energy(), ll)?;
    let k_right = wavenumber(g.energy(), lr)?;
    let (x0, xn) = g.x_range();
    Ok(Edges { k_left, k_right, left: g.eval_in(1, x0)?, right: g.eval_in(g.num_domains(), xn)? })
}

fn assemble(g: &GlobalBasis, e: &Edges, c: Vec2, from_left: bool) -> ScatteringResult {
    let (ap_l, am_l) = split(&combine_state(&c, &e.left.0, &e.left.1), e.k_left);
    let (ap_r, am_r) = split(&combine_state(&c, &e.right.0, &e.right.1), e.k_right);
    let (r, t, ratio) = if from_left {
        (am_l / ap_l, ap_r / ap_l, e.k_right / e.k_left)
    } else {
        (ap_r / am_r, am_l / am_r, e.k_left / e.k_right)
    };
    ScatteringResult {
        energy: g.energy(),
        k_left: e.k_left,
        k_right: e.k_right,
        a_plus_left: ap_l,
        a_minus_left: am_l,
        a_plus_right: ap_r,
        a_minus_right: am_r,
        r,
        t,
        reflectance: r.norm_sqr(),
        transmittance: ratio * t.norm_sqr(),
        coefficients: c,
    }
}

/// Fixes `c` from the incoming amplitudes and reports all lead amplitudes.
pub fn solve_scattering(g: &GlobalBasis, incoming: Incoming) -> Result<ScatteringResult> {
    let e = edges(g)?;
    let (u, v) = (
        [split(&e.left.0, e.k_left).0, split(&e.left.1, e.k_left).0],
        [split(&e.right.0, e.k_right).1, split(&e.right.1, e.k_right).1],
    );
    let m = Mat2::new(u[0], u[1], v[0], v[1]);
    let scale = (u[0].norm() + u[1].norm()) * (v[0].norm() + v[1].norm());
    if !(m.det().norm() > 1e-14 * scale) {
        return Err(Error::SingularSystem("scattering amplitudes"));
    }
    let c = solve(&m, [incoming.from_left, incoming.from_right]).ok_or(Error::SingularSystem("scattering amplitudes"))?;
    Ok(assemble(g, &e, c, incoming.from_left.norm() > 0.0 || incoming.from_right.norm() == 0.0))
}

/// Amplitudes of `psi = xi_1 + xi_2`; the ingoing pair is `(a_plus_left, a_minus_right)`.
pub fn design_amplitudes(g: &GlobalBasis) -> Result<ScatteringResult> {
    let e = edges(g)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(assemble(g, &e, [one, one], true))
}

/// Builds the global basis and scatters a wave incident from the left.
pub fn scatter(p: &PotentialSpec, energy: f64, opts: &SolveOptions) -> Result<ScatteringResult> {
    solve_scattering(&basis_at(p, energy, opts)?, Incoming::left())
}

/// Energy-quantizing boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `psi(x_0) = psi(x_N) = 0`.
    DirichletBox,
    /// `psi` decays into both leads: `psi'/psi = kappa_L` at `x_0`, `-kappa_R` at `x_N`.
    DecayingLeads,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Coefficients of `xi` with unit Euclidean norm, phased so `psi` is real.
    pub coefficients: Vec2,
    /// `sqrt(int |psi|^2)` for these coefficients, lead tails included.
    pub norm: f64,
    pub nodes: usize,
    /// `Im(psi* psi')` at `x_0`.
    pub current: f64,
}

impl BoundState {
    /// Coefficients scaled to a unit-norm state.
    pub fn normalized_coefficients(&self) -> Vec2 {
        [self.coefficients[0] / self.norm, self.coefficients[1] / self.norm]
    }
}

fn condition_rows(g: &GlobalBasis, bc: BoundaryCondition) -> Result<Mat2> {
    let (x0, xn) = g.x_range();
    let (l1, l2) = g.eval_in(1, x0)?;
    let (r1, r2) = g.eval_in(g.num_domains(), xn)?;
    Ok(match bc {
        BoundaryCondition::DirichletBox => Mat2::new(l1.value, l2.value, r1.value, r2.value),
        BoundaryCondition::DecayingLeads => {
            let (vl, vr) = g.leads();
            let kl = (2.0 * (vl - g.energy())).sqrt();
            let kr = (2.0 * (vr - g.energy())).sqrt();
            Mat2::new(
                l1.derivative - l1.value * kl,
                l2.derivative - l2.value * kl,
                r1.derivative + r1.value * kr,
                r2.derivative + r2.value * kr,
            )
        }
    })
}

/// Boundary-condition determinant divided by `W(xi_1, xi_2)`.
///
/// The ratio does not depend on the basis normalization and is real for real
/// potentials; its zeros are the bound-state energies.
pub fn bound_determinant(g: &GlobalBasis, bc: BoundaryCondition) -> Result<f64> {
    let w = g.wronskian()?;
    Ok((condition_rows(g, bc)?.det() / w).re)
}

fn check_range(p: &PotentialSpec, range: (f64, f64), bc: BoundaryCondition) -> Result<()> {
    let (e0, e1) = range;
    if !(e0.is_finite() && e1.is_finite() && e0 < e1) {
        return Err(Error::InvalidSpec("bound: energy range must be finite with E0 < E1".into()));
    }
    if bc == BoundaryCondition::DecayingLeads && e1 >= p.lead_left.min(p.lead_right) {
        return Err(Error::InvalidSpec("bound: decaying leads require energies below both lead potentials".into()));
    }
    Ok(())
}

/// Default scan density: 400 points per unit of energy, at least 16.
pub fn default_scan(range: (f64, f64)) -> usize {
    ((400.0 * (range.1 - range.0)).ceil() as usize).max(16)
}

/// Scans `n_scan` energies, brackets sign changes of the boundary determinant
/// and bisects each bracket. The basis is rebuilt at every trial energy.
pub fn solve_bound_states(
    p: &PotentialSpec,
    range: (f64, f64),
    bc: BoundaryCondition,
    n_scan: Option<usize>,
) -> Result<Vec<BoundState>> {
    solve_bound_states_with(p, range, bc, n_scan, &SolveOptions::default())
}

pub fn solve_bound_states_with(
    p: &PotentialSpec,
    range: (f64, f64),
    bc: BoundaryCondition,
    n_scan: Option<usize>,
    opts: &SolveOptions,
) -> Result<Vec<BoundState>> {
    check_range(p, range, bc)?;
    let n = n_scan.unwrap_or_else(|| default_scan(range)).max(2);
    let f = |e: f64| bound_determinant(&basis_at(p, e, opts)?, bc);
    let grid: Vec<f64> = (0..n).map(|j| range.0 + (range.1 - range.0) * j as f64 / (n - 1) as f64).collect();
    let values = grid.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for j in 0..n - 1 {
        let (fa, fb) = (values[j], values[j + 1]);
        if fa == 0.0 {
            roots.push(grid[j]);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, grid[j], grid[j + 1], fa)?);
        }
    }
    if values[n - 1] == 0.0 {
        roots.push(grid[n - 1]);
    }
    roots.into_iter().map(|e| bound_state(&basis_at(p, e, opts)?, bc)).collect()
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= 1e-13 * m.abs().max(1.0) {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Samples of `psi` on a grid with `per_cell` intervals per cell.
fn sample_psi(g: &GlobalBasis, c: &Vec2, per_cell: usize) -> Result<Vec<StateVector>> {
    let mut out = Vec::new();
    for d in 1..=g.num_domains() {
        let spec = &g.lsb(d)?.spec;
        for l in 1..=spec.cells {
            let (lo, hi) = spec.cell_bounds(l)?;
            let first = if out.is_empty() { 0 } else { 1 };
            for j in first..=per_cell {
                let x = lo + (hi - lo) * j as f64 / per_cell as f64;
                let (a, b) = g.eval_in(d, x)?;
                out.push(combine_state(c, &a, &b));
            }
        }
    }
    Ok(out)
}

/// Builds the bound state at a root energy of [`bound_determinant`].
pub fn bound_state(g: &GlobalBasis, bc: BoundaryCondition) -> Result<BoundState> {
    let rows = condition_rows(g, bc)?;
    let (a, b) = if rows.get(0, 0).norm() + rows.get(0, 1).norm() >= rows.get(1, 0).norm() + rows.get(1, 1).norm() {
        (rows.get(0, 0), rows.get(0, 1))
    } else {
        (rows.get(1, 0), rows.get(1, 1))
    };
    let len = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if !(len > 0.0) {
        return Err(Error::SingularSystem("bound-state coefficients"));
    }
    let mut c = [b / len, -a / len];
    let samples = sample_psi(g, &c, 32)?;
    let peak = samples.iter().max_by(|x, y| x.value.norm().total_cmp(&y.value.norm())).map(|s| s.value).unwrap_or_default();
    if peak.norm() > 0.0 {
        let phase = peak / peak.norm();
        c = [c[0] / phase, c[1] / phase];
    }
    let samples = sample_psi(g, &c, 32)?;

    // composite Simpson per cell
    let mut integral = 0.0;
    let per = 32;
    let mut i = 0;
    while i + per < samples.len() {
        let h = (samples[i + per].x - samples[i].x) / per as f64;
        let mut acc = samples[i].value.norm_sqr() + samples[i + per].value.norm_sqr();
        for j in 1..per {
            acc += samples[i + j].value.norm_sqr() * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        integral += acc * h / 3.0;
        i += per;
    }
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if bc == BoundaryCondition::DecayingLeads {
        let (vl, vr) = g.leads();
        integral += first.value.norm_sqr() / (2.0 * (2.0 * (vl - g.energy())).sqrt());
        integral += last.value.norm_sqr() / (2.0 * (2.0 * (vr - g.energy())).sqrt());
    }

    let peak = samples.iter().map(|s| s.value.norm()).fold(0.0, f64::max);
    let mut nodes = 0;
    let mut prev: Option<f64> = None;
    for s in &samples {
        if s.value.norm() < 1e-6 * peak {
            continue;
        }
        let v = s.value.re;
        if let Some(p) = prev {
            if (p < 0.0) != (v < 0.0) {
                nodes += 1;
            }
        }
        prev = Some(v);
    }
    Ok(BoundState { energy: g.energy(), coefficients: c, norm: integral.sqrt(), nodes, current: first.current() })
}

/// Two-point currents of one solution at `x` and `x_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureCurrents {
    pub q: Complex64,
    pub q_tilde: Complex64,
    /// Physical current at `x`.
    pub current: f64,
    pub sigma: i8,
    pub domain: Option<usize>,
}

impl PureCurrents {
    /// `||Q~|^2 - |Q|^2 - sigma J^2|`.
    pub fn relation_residual(&self) -> f64 {
        (self.q_tilde.norm_sqr() - self.q.norm_sqr() - self.sigma as f64 * self.current * self.current).abs()
    }
}

pub fn pure_currents(psi_at_x: &StateVector, psi_at_xbar: &StateVector, sigma: i8) -> PureCurrents {
    let c = two_point_currents(psi_at_x, psi_at_xbar, sigma);
    PureCurrents { q: c.q, q_tilde: c.q_tilde, current: psi_at_x.current(), sigma, domain: None }
}

/// `psi(x_bar) = (Q~ psi(x) - Q psi*(x)) / J`.
pub fn map_pure(q: &PureCurrents, psi_at_x: &StateVector) -> Result<Complex64> {
    if !(q.current.abs() > 1e-12 * q.q_tilde.norm()) {
        return Err(Error::ZeroCurrent { current: q.current });
    }
    Ok((q.q_tilde * psi_at_x.value - q.q * psi_at_x.value.conj()) / q.current)
}

/// `V(x) = E + chi''(x) / (2 chi(x))` on the sample grid of a nodeless profile.
pub fn potential_from_profile(chi: &[f64], chi_second: &[f64], energy: f64) -> Result<Vec<f64>> {
    if chi.len() != chi_second.len() || chi.is_empty() {
        return Err(Error::InvalidSpec("profile: chi and chi'' need the same nonzero length".into()));
    }
    let peak = chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, &v) in chi.iter().enumerate() {
        if !(v.abs() >= 1e-6 * peak) || peak == 0.0 {
            return Err(Error::ProfileNode { index: i, value: v.abs() });
        }
    }
    Ok(chi.iter().zip(chi_second).map(|(c, c2)| energy + c2 / (2.0 * c)).collect())
}

/// Local cell coefficients `a = c G_l S` of `psi` in the default first-cell basis.
pub fn local_coefficients(g: &GlobalBasis, c: &Vec2, d: usize, l: usize) -> Result<Vec2> {
    let gs = g.propagation_matrix(d, l)? * *g.lsb(d)?.s();
    Ok(gs.transpose().apply(*c))
}
