//! Local symmetry basis: the basis `chi = S phi` in which `Q` is diagonal.
//!
//! In this basis each component is an eigenfunction of the domain's symmetry
//! operation, `chi_pm(F(x)) = z_pm chi_pm(x)`, so values in cell `l` follow
//! from the first cell by the scalar powers `z_pm^(l-1)`.

use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::integrator::{integrate_potential_cell, CellBasis, StateVector, DEFAULT_TOL};
use crate::invariants::{q_matrix, QMatrix};
use crate::linalg::{pow_log, Mat2};
use crate::potential::{DomainSpec, PotentialSpec, SymmetryKind};

/// Largest `ln|z^n|` accepted before reporting a scale overflow.
pub const MAX_LOG_SCALE: f64 = 700.0;

/// Spectral type of a domain at the given energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// Inversion: `z = +1` (even) and `z = -1` (odd).
    Parity,
    /// Translation with `Delta < 0`: `z = exp(+-i k L)`; holds `k L` in `(0, pi)`.
    BlochPropagating { k_l: f64 },
    /// Translation with `Delta > 0`: `|z| = exp(+-kappa L)`. `alternating` marks
    /// negative `z` (gap at the zone boundary).
    BlochEvanescent { kappa_l: f64, alternating: bool },
    /// `Delta = 0`: double root `z = +-1`.
    Degenerate { z: f64 },
}

/// Result of diagonalizing `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsbTransform {
    /// Rows are left eigenvectors of `Q`, each scaled so its largest entry is 1.
    pub s: Mat2,
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub classification: Classification,
    /// Real part of `(tr Q / 2)^2 - sigma`.
    pub delta: f64,
    /// `S Q S^-1`; diagonal unless degenerate.
    pub q_chi: Mat2,
    pub q: QMatrix,
}

/// Default degeneracy tolerance `1e-10 * max(1, |tr/2|^2)`.
pub fn default_tol_deg(q: &QMatrix) -> f64 {
    let half = q.trace.norm() / 2.0;
    1e-10 * (half * half).max(1.0)
}

fn normalize_rows(s: Mat2) -> Mat2 {
    let mut out = s;
    for r in 0..2 {
        let pivot = if s.get(r, 0).norm() >= s.get(r, 1).norm() { s.get(r, 0) } else { s.get(r, 1) };
        if !pivot.is_zero() {
            out.0[r][0] = s.get(r, 0) / pivot;
            out.0[r][1] = s.get(r, 1) / pivot;
        }
    }
    out
}

/// Eigenvalues `z_pm = tr/2 +- sqrt(Delta)`, the diagonalizing `S`, and the
/// classification of the domain.
pub fn diagonalize_q(q: &QMatrix, tol_deg: Option<f64>) -> Result<LsbTransform> {
    let sigma = q.sigma as f64;
    let det = q.det();
    let det_tol = 1e-6 * q.entries.max_abs().powi(2).max(1.0);
    if (det - sigma).norm() > det_tol || !det.is_finite() {
        return Err(Error::InconsistentDeterminant { det_re: det.re, det_im: det.im, sigma: q.sigma });
    }
    let half = q.trace / 2.0;
    let delta = q.delta;
    let tol_deg = tol_deg.unwrap_or_else(|| default_tol_deg(q));

    if q.sigma > 0 && delta.norm() <= tol_deg {
        let z = if half.re >= 0.0 { 1.0 } else { -1.0 };
        return Ok(LsbTransform {
            s: Mat2::identity(),
            z_plus: half,
            z_minus: half,
            classification: Classification::Degenerate { z },
            delta: delta.re,
            q_chi: q.entries,
            q: *q,
        });
    }

    let root = delta.sqrt();
    let (a, b) = (half + root, half - root);
    // z_plus: positive imaginary part (propagating), larger modulus
    // (evanescent), or the +1 root (parity).
    let plus_first = if q.sigma < 0 {
        a.re >= b.re
    } else if delta.re < 0.0 {
        a.im >= b.im
    } else {
        a.norm() >= b.norm()
    };
    let (z_plus, z_minus) = if plus_first { (a, b) } else { (b, a) };
    let offset = z_plus - half;

    let qm = &q.q;
    let (q11, q12, q21, q22) = (qm[0][0], qm[0][1], qm[1][0], qm[1][1]);
    let scale = q.wronskian.norm().max(1e-300);
    let s = if q11.norm() <= 1e-14 * scale && q22.norm() <= 1e-14 * scale {
        // already diagonal: order the rows so that row 1 belongs to z_plus
        if (q.entries.get(0, 0) - z_plus).norm() <= (q.entries.get(1, 1) - z_plus).norm() {
            Mat2::identity()
        } else {
            Mat2::real(0.0, 1.0, 1.0, 0.0)
        }
    } else {
        let sqrt_d = -Complex64::i() * q.wronskian * offset;
        let gamma_plus = (q12 + q21 + sqrt_d) / 2.0;
        let gamma_minus = (q12 + q21 - sqrt_d) / 2.0;
        if q11.norm() >= q22.norm() {
            Mat2::new(gamma_minus, -q11, -gamma_plus, q11)
        } else {
            Mat2::new(q22, -gamma_plus, -q22, gamma_minus)
        }
    };
    let s = normalize_rows(s);
    if s.inverse().is_none() {
        return Err(Error::DegenerateBasis { domain: None, operation: "lsb::diagonalize_q" });
    }

    let classification = match q.sigma {
        -1 => Classification::Parity,
        _ if delta.re < 0.0 => Classification::BlochPropagating { k_l: (-delta.re).sqrt().atan2(half.re) },
        _ => Classification::BlochEvanescent { kappa_l: z_plus.norm().ln(), alternating: z_plus.re < 0.0 },
    };
    Ok(LsbTransform {
        s,
        z_plus,
        z_minus,
        classification,
        delta: delta.re,
        q_chi: Mat2::diag(z_plus, z_minus),
        q: *q,
    })
}

/// Local symmetry basis of one domain.
#[derive(Debug, Clone)]
pub struct DomainLsb {
    pub domain: usize,
    pub spec: DomainSpec,
    /// First-cell basis `phi` (the whole domain when it has no symmetry).
    pub basis: CellBasis,
    /// `None` for domains without symmetry, where `chi = phi`.
    pub transform: Option<LsbTransform>,
    s: Mat2,
    q_chi: Mat2,
}

/// Integrates the first cell of domain `d`, builds `Q` at the convenient
/// points and diagonalizes it.
///
/// `Q` is formed at `(alpha^-, alpha^+)` for inversion and at
/// `(x_{d-1}, x_{d-1} + L)` for translation, so only the first cell is needed.
pub fn build_domain_lsb(p: &PotentialSpec, d: usize, energy: f64) -> Result<DomainLsb> {
    build_domain_lsb_with_tol(p, d, energy, DEFAULT_TOL)
}

pub fn build_domain_lsb_with_tol(p: &PotentialSpec, d: usize, energy: f64, tol: f64) -> Result<DomainLsb> {
    let spec = p.domain(d)?.clone();
    let basis = integrate_potential_cell(p, d, 1, energy, tol)?;
    let tag = |e: Error| match e {
        Error::DegenerateBasis { operation, .. } => Error::DegenerateBasis { domain: Some(d), operation },
        other => other,
    };
    let transform = match spec.transform.kind {
        SymmetryKind::None => None,
        SymmetryKind::Inversion => {
            let at_alpha = basis.eval(spec.transform.alpha)?;
            let q = q_matrix(&at_alpha, &at_alpha, -1).map_err(tag)?;
            Some(diagonalize_q(&q, None).map_err(tag)?)
        }
        SymmetryKind::Translation => {
            let left = basis.eval(spec.start)?;
            let right = basis.eval(spec.start + spec.transform.length)?;
            let q = q_matrix(&left, &right, 1).map_err(tag)?;
            Some(diagonalize_q(&q, None).map_err(tag)?)
        }
    };
    let (s, q_chi) = match &transform {
        Some(t) => (t.s, t.q_chi),
        None => (Mat2::identity(), Mat2::identity()),
    };
    Ok(DomainLsb { domain: d, spec, basis, transform, s, q_chi })
}

impl DomainLsb {
    pub fn s(&self) -> &Mat2 {
        &self.s
    }

    pub fn q_chi(&self) -> &Mat2 {
        &self.q_chi
    }

    pub fn sigma(&self) -> i8 {
        self.spec.sigma()
    }

    pub fn cells(&self) -> usize {
        self.spec.cells
    }

    pub fn is_symmetric(&self) -> bool {
        self.transform.is_some()
    }

    pub fn steps(&self) -> usize {
        self.basis.steps()
    }

    /// Multiplies the `chi_+` and `chi_-` rows by constants. Observables do not
    /// depend on this choice.
    pub fn rescale_rows(&mut self, plus: Complex64, minus: Complex64) {
        let d = Mat2::diag(plus, minus);
        self.s = d * self.s;
        if let Some(inv) = d.inverse() {
            self.q_chi = d * self.q_chi * inv;
        }
    }

    /// `chi(x) = S phi(x)` for `x` in the first cell.
    pub fn chi_first(&self, x: f64) -> Result<(StateVector, StateVector)> {
        let (p1, p2) = self.basis.eval(x)?;
        Ok(combine(&self.s, &(p1, p2)))
    }

    /// `Q_chi^n`, with diagonal powers in log form and an overflow check.
    pub fn q_chi_power(&self, n: i64) -> Result<Mat2> {
        if n == 0 || self.transform.is_none() {
            return Ok(Mat2::identity());
        }
        let m = &self.q_chi;
        if m.is_diagonal() {
            let (a, la) = pow_log(m.get(0, 0), n);
            let (b, lb) = pow_log(m.get(1, 1), n);
            let worst = la.max(lb);
            if worst > MAX_LOG_SCALE || !(a.is_finite() && b.is_finite()) {
                return Err(Error::ScaleOverflow { domain: self.domain, log_magnitude: worst });
            }
            Ok(Mat2::diag(a, b))
        } else {
            let out = m.powi(n).ok_or(Error::DegenerateBasis { domain: Some(self.domain), operation: "lsb::q_chi_power" })?;
            if !out.is_finite() || out.max_abs().ln() > MAX_LOG_SCALE {
                return Err(Error::ScaleOverflow { domain: self.domain, log_magnitude: out.max_abs().ln() });
            }
            Ok(out)
        }
    }

    /// `chi` in cell `l`: `Q_chi^(l-1) chi_1(F^-(l-1)(x))`, derivatives carrying
    /// the chain-rule factor `sigma^(l-1)`.
    pub fn propagate_chi(&self, l: usize, x: f64) -> Result<(StateVector, StateVector)> {
        self.propagate_with(&self.q_chi_power(l as i64 - 1)?, l, x)
    }

    /// Like [`propagate_chi`](Self::propagate_chi) with a caller-supplied
    /// propagation matrix for cell `l`.
    pub fn propagate_with(&self, g: &Mat2, l: usize, x: f64) -> Result<(StateVector, StateVector)> {
        if l == 0 || l > self.spec.cells {
            return Err(Error::CellIndex { index: l, cells: self.spec.cells });
        }
        let x1 = self.spec.to_first_cell(x, l);
        let (lo, hi) = self.basis.interval();
        let slack = 1e-9 * (hi - lo).abs().max(x1.abs());
        let x1 = if x1 < lo && x1 > lo - slack {
            lo
        } else if x1 > hi && x1 < hi + slack {
            hi
        } else {
            x1
        };
        let chi = self.chi_first(x1)?;
        let sign = if self.sigma() < 0 && l % 2 == 0 { -1.0 } else { 1.0 };
        let (a, b) = combine(g, &chi);
        Ok((
            StateVector::new(a.value, a.derivative * sign, x),
            StateVector::new(b.value, b.derivative * sign, x),
        ))
    }
}

/// `m (f, g)` applied to values and derivatives alike.
pub(crate) fn combine(m: &Mat2, pair: &(StateVector, StateVector)) -> (StateVector, StateVector) {
    let v = m.apply([pair.0.value, pair.1.value]);
    let d = m.apply([pair.0.derivative, pair.1.derivative]);
    (StateVector::new(v[0], d[0], pair.0.x), StateVector::new(v[1], d[1], pair.0.x))
}

pub fn propagate_chi(lsb: &DomainLsb, l: usize, x: f64) -> Result<(StateVector, StateVector)> {
    lsb.propagate_chi(l, x)
}
