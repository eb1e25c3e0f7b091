//! Symmetry-induced two-point currents and the invariant mapping matrix `Q`.
//!
//! For a potential symmetric under `x -> xbar = sigma x + rho` on a domain, the
//! mixed currents
//!
//! ```text
//! q_{m nbar} = [sigma phi_m(x) phi_n'(xbar) - phi_m'(x) phi_n(xbar)] / 2i
//! ```
//!
//! are constant in `x`, and the basis is mapped between symmetry-related
//! points by `phi(xbar) = Q phi(x)` with
//! `Q = (2i / w) [[-q_{2 1bar}, q_{1 1bar}], [-q_{2 2bar}, q_{1 2bar}]]`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrator::{sweep_cells, wronskian_of, StateVector, DEFAULT_TOL};
use crate::linalg::Mat2;
use crate::potential::{PotentialSpec, SymmetryKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Imaginary parts of `tr Q` and `Delta` below this (relative) level are noise.
pub const REALITY_TOL: f64 = 1e-9;

/// Degeneracy threshold on `|w|` relative to the product of the basis row norms.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Mixed currents of two solutions evaluated at `x` and `xbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCurrents {
    pub q: Complex64,
    pub q_tilde: Complex64,
    /// Current of `phi_m`, evaluated at `x`.
    pub j_m: f64,
    /// Current of `phi_n`, evaluated at `xbar`.
    pub j_n: f64,
    pub sigma: i8,
}

/// `(sigma f(x) g'(xbar) - f'(x) g(xbar)) / 2i` with a general derivative factor.
pub(crate) fn bilinear(f_at_x: &StateVector, g_at_xbar: &StateVector, factor: f64) -> Complex64 {
    (f_at_x.value * g_at_xbar.derivative * factor - f_at_x.derivative * g_at_xbar.value) / (2.0 * I)
}

pub fn two_point_currents(m_at_x: &StateVector, n_at_xbar: &StateVector, sigma: i8) -> MixedCurrents {
    let s = sigma as f64;
    MixedCurrents {
        q: bilinear(m_at_x, n_at_xbar, s),
        q_tilde: bilinear(&m_at_x.conj(), n_at_xbar, s),
        j_m: m_at_x.current(),
        j_n: n_at_xbar.current(),
        sigma,
    }
}

/// Residual of `|q~|^2 - |q|^2 = sigma j_m j_n` (real potentials only).
///
/// For translations (`sigma = +1`) this is the familiar `j_m j_n` relation;
/// for inversions the right-hand side changes sign.
pub fn check_relation(c: &MixedCurrents) -> f64 {
    (c.q_tilde.norm_sqr() - c.q.norm_sqr() - c.sigma as f64 * c.j_m * c.j_n).abs()
}

/// The four `q_{m nbar}` of a basis pair, `[m][n]`, for derivative factor
/// `factor` (`sigma` for isometries, `F'(x)` in general).
pub fn mixed_matrix(
    phi_x: &(StateVector, StateVector),
    phi_xbar: &(StateVector, StateVector),
    factor: f64,
) -> [[Complex64; 2]; 2] {
    let a = [phi_x.0, phi_x.1];
    let b = [phi_xbar.0, phi_xbar.1];
    core::array::from_fn(|m| core::array::from_fn(|n| bilinear(&a[m], &b[n], factor)))
}

/// Invariant mapping matrix of one domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMatrix {
    pub entries: Mat2,
    /// `q_{m nbar}` it was assembled from, `[m][n]`.
    pub q: [[Complex64; 2]; 2],
    pub sigma: i8,
    pub trace: Complex64,
    /// `(tr/2)^2 - sigma`.
    pub delta: Complex64,
    pub wronskian: Complex64,
    /// Largest imaginary part removed from trace or `Delta`; above
    /// [`REALITY_TOL`] the basis did not come from a real potential problem.
    pub reality_residual: f64,
}

impl QMatrix {
    /// Assembles `Q` from the mixed currents and the basis Wronskian.
    pub fn from_currents(q: [[Complex64; 2]; 2], wronskian: Complex64, sigma: i8) -> QMatrix {
        let f = 2.0 * I / wronskian;
        let entries = Mat2::new(-q[1][0] * f, q[0][0] * f, -q[1][1] * f, q[0][1] * f);
        let raw_trace = entries.trace();
        let raw_delta = raw_trace * raw_trace / 4.0 - sigma as f64;
        let mut residual: f64 = 0.0;
        let mut realify = |z: Complex64| {
            let rel = z.im.abs() / z.norm().max(1.0);
            residual = residual.max(rel);
            if rel <= REALITY_TOL {
                Complex64::new(z.re, 0.0)
            } else {
                z
            }
        };
        let trace = realify(raw_trace);
        let delta = realify(raw_delta);
        QMatrix { entries, q, sigma, trace, delta, wronskian, reality_residual: residual }
    }

    pub fn det(&self) -> Complex64 {
        self.entries.det()
    }

    pub fn has_real_invariants(&self) -> bool {
        self.reality_residual <= REALITY_TOL
    }
}

pub(crate) fn check_degenerate(phi: &(StateVector, StateVector), w: Complex64) -> bool {
    let row = |s: &StateVector| (s.value.norm_sqr() + s.derivative.norm_sqr()).sqrt();
    !(w.norm() >= DEGENERACY_TOL * row(&phi.0) * row(&phi.1)) || !w.is_finite()
}

/// `Q` from the basis at `x` and at `xbar = F(x)`.
pub fn q_matrix(
    phi_x: &(StateVector, StateVector),
    phi_xbar: &(StateVector, StateVector),
    sigma: i8,
) -> Result<QMatrix> {
    let w = wronskian_of(&phi_x.0, &phi_x.1);
    if check_degenerate(phi_x, w) {
        return Err(Error::DegenerateBasis { domain: None, operation: "invariants::q_matrix" });
    }
    Ok(QMatrix::from_currents(mixed_matrix(phi_x, phi_xbar, sigma as f64), w, sigma))
}

/// `Q (phi_1(x), phi_2(x))`, the predicted basis values at `xbar`.
pub fn map_basis(q: &QMatrix, phi_x: &(StateVector, StateVector)) -> [Complex64; 2] {
    q.entries.apply([phi_x.0.value, phi_x.1.value])
}

/// Spread of each `q_{m nbar}` over sampled symmetry-related pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub domain: usize,
    pub sigma: i8,
    /// Mean value per `[m][n]`.
    pub mean: [[Complex64; 2]; 2],
    /// `|max - min|` per `[m][n]` (real and imaginary ranges combined).
    pub spread: [[f64; 2]; 2],
    /// Integration steps spent on the reference basis.
    pub steps: usize,
}

impl InvarianceReport {
    pub fn max_spread(&self) -> f64 {
        self.spread.iter().flatten().fold(0.0, |a: f64, b| a.max(*b))
    }
}

/// Integrates the default basis through every cell of domain `d` and measures
/// how constant each `q_{m nbar}` is over `n_pairs` pairs `(x, F_d(x))`.
pub fn invariance_report(p: &PotentialSpec, d: usize, energy: f64, n_pairs: usize, tol: f64) -> Result<InvarianceReport> {
    let dom = p.domain(d)?;
    if !dom.transform.is_symmetric() {
        return Err(Error::NoSymmetryMapping { domain: d });
    }
    let cells: Vec<(usize, usize)> = (1..=dom.cells).map(|l| (d, l)).collect();
    let inits = [StateVector::real(1.0, 0.0, dom.start), StateVector::real(0.0, 1.0, dom.start)];
    let sweep = sweep_cells(p, &cells, energy, &inits, tol, false)?;
    let (lo, hi) = match dom.transform.kind {
        SymmetryKind::Inversion => (dom.start, dom.transform.alpha),
        _ => dom.transform_region(),
    };
    let n = n_pairs.max(2);
    let sigma = dom.sigma();
    let mut samples: Vec<[[Complex64; 2]; 2]> = Vec::with_capacity(n);
    for j in 0..n {
        let x = lo + (hi - lo) * j as f64 / (n - 1) as f64;
        let xbar = dom.transform.apply(x)?;
        let at = |y: f64| -> Result<(StateVector, StateVector)> { Ok((sweep.eval(0, y)?, sweep.eval(1, y)?)) };
        samples.push(mixed_matrix(&at(x)?, &at(xbar)?, sigma as f64));
    }
    let (mean, spread) = mean_and_spread(&samples);
    Ok(InvarianceReport { domain: d, sigma, mean, spread, steps: sweep.steps() })
}

/// Mean and `|max - min|` of each entry over the samples.
pub(crate) fn mean_and_spread(samples: &[[[Complex64; 2]; 2]]) -> ([[Complex64; 2]; 2], [[f64; 2]; 2]) {
    let mut mean = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut spread = [[0.0; 2]; 2];
    for m in 0..2 {
        for k in 0..2 {
            let (mut re_lo, mut re_hi, mut im_lo, mut im_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            let mut sum = Complex64::new(0.0, 0.0);
            for s in samples {
                let z = s[m][k];
                re_lo = re_lo.min(z.re);
                re_hi = re_hi.max(z.re);
                im_lo = im_lo.min(z.im);
                im_hi = im_hi.max(z.im);
                sum += z;
            }
            mean[m][k] = sum / samples.len().max(1) as f64;
            spread[m][k] = (re_hi - re_lo).hypot(im_hi - im_lo);
        }
    }
    (mean, spread)
}

/// Largest spread of any `q_{m nbar}` in domain `d` at the default tolerance.
pub fn check_invariance(p: &PotentialSpec, d: usize, energy: f64, n_pairs: usize) -> Result<f64> {
    Ok(invariance_report(p, d, energy, n_pairs, DEFAULT_TOL)?.max_spread())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{CellProfile, DomainSpec};
    use alloc::vec;

    fn trig(x: f64) -> (StateVector, StateVector) {
        (StateVector::real(x.cos(), -x.sin(), x), StateVector::real(x.sin(), x.cos(), x))
    }

    fn plane(k: f64, x: f64, sign: f64) -> StateVector {
        let e = Complex64::from_polar(1.0, sign * k * x);
        StateVector::new(e, e * Complex64::new(0.0, sign * k), x)
    }

    #[test]
    fn cos_sin_translation_by_pi() {
        let pi = core::f64::consts::PI;
        let (c, _) = trig(0.0);
        let (_, s) = trig(pi);
        let cur = two_point_currents(&c, &s, 1);
        // cos(pi) / 2i = +i/2
        assert!((cur.q - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(cur.q, cur.q_tilde);
        assert_eq!(check_relation(&cur), 0.0);
    }

    #[test]
    fn plane_wave_relation_translation() {
        let k = 1.3;
        let cur = two_point_currents(&plane(k, 0.2, 1.0), &plane(k, 0.2 + 0.7, -1.0), 1);
        assert!((cur.j_m * cur.j_n + k * k).abs() < 1e-12);
        assert!((cur.q_tilde.norm_sqr() - cur.q.norm_sqr() + k * k).abs() < 1e-12);
        assert!(check_relation(&cur) < 1e-12);
    }

    #[test]
    fn relation_carries_sigma_for_inversion() {
        // e^{ikx} mirrored through 0: |q~|^2 - |q|^2 = -k^2 while j^2 = k^2.
        let k = 0.8;
        let x = 0.37;
        let psi = plane(k, x, 1.0);
        let psi_bar = plane(k, -x, 1.0);
        let cur = two_point_currents(&psi, &psi_bar, -1);
        let lhs = cur.q_tilde.norm_sqr() - cur.q.norm_sqr();
        assert!((lhs + k * k).abs() < 1e-12);
        assert!(check_relation(&cur) < 1e-12);
    }

    #[test]
    fn pure_current_at_same_point_is_physical_current() {
        let psi = StateVector::new(Complex64::new(0.3, 1.1), Complex64::new(-0.7, 0.4), 0.0);
        let cur = two_point_currents(&psi, &psi, 1);
        let j = ((psi.value.conj() * psi.derivative - psi.derivative.conj() * psi.value) / (2.0 * I)).re;
        assert!((cur.j_m - j).abs() < 1e-15);
        assert!((cur.q_tilde.re - j).abs() < 1e-15 && cur.q_tilde.im.abs() < 1e-15);
    }

    #[test]
    fn q_matrix_rotation_and_parity() {
        let l = 0.9;
        let q = q_matrix(&trig(0.0), &trig(l), 1).unwrap();
        let expect = Mat2::real(l.cos(), -l.sin(), l.sin(), l.cos());
        assert!(q.entries.dist(&expect) < 1e-14);
        assert!((q.det() - 1.0).norm() < 1e-14);

        let x = 0.4;
        let q = q_matrix(&trig(x), &trig(-x), -1).unwrap();
        assert!(q.entries.dist(&Mat2::real(1.0, 0.0, 0.0, -1.0)) < 1e-14);
        assert!(q.trace.norm() < 1e-14);
        assert!((q.det() + 1.0).norm() < 1e-14);
    }

    #[test]
    fn map_basis_examples() {
        let l = core::f64::consts::FRAC_PI_2;
        let q = q_matrix(&trig(0.0), &trig(l), 1).unwrap();
        let x = 0.3;
        let mapped = map_basis(&q, &trig(x));
        assert!((mapped[0].re + x.sin()).abs() < 1e-14);
        assert!((mapped[1].re - x.cos()).abs() < 1e-14);

        let q = q_matrix(&trig(0.2), &trig(-0.2), -1).unwrap();
        let mapped = map_basis(&q, &trig(x));
        assert!((mapped[0].re - x.cos()).abs() < 1e-14);
        assert!((mapped[1].re + x.sin()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_basis_rejected() {
        let s = StateVector::real(1.0, 0.5, 0.0);
        let r = q_matrix(&(s, s.scale(2.0.into())), &(s, s), 1);
        assert!(matches!(r, Err(Error::DegenerateBasis { .. })));
    }

    fn cos_lattice(asym: f64) -> PotentialSpec {
        let prof = CellProfile::Cosine { amplitude: 1.2, period: 1.0, phase: 0.0, offset: 0.3 };
        let mut doms = vec![DomainSpec::translation(0.0, 3.0, 3, prof).unwrap()];
        if asym != 0.0 {
            // same lattice but imported with a slanted distortion
            let xs: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
            let vs = xs
                .iter()
                .map(|x| 0.3 + 1.2 * (2.0 * core::f64::consts::PI * x).cos() + asym * x)
                .collect();
            doms = vec![DomainSpec::translation(0.0, 3.0, 3, CellProfile::samples(xs, vs).unwrap())
                .unwrap()
                .imported()
                .unwrap()];
            return PotentialSpec::new_unchecked(doms, 0.0, 0.0).unwrap();
        }
        PotentialSpec::new(doms, 0.0, 0.0).unwrap()
    }

    #[test]
    fn invariance_in_symmetric_lattice() {
        let p = cos_lattice(0.0);
        let dev = check_invariance(&p, 1, 0.7, 60).unwrap();
        assert!(dev <= 1e-8, "{dev}");
    }

    #[test]
    fn invariance_broken_by_asymmetry() {
        let p = cos_lattice(0.01);
        let dev = check_invariance(&p, 1, 0.7, 60).unwrap();
        assert!(dev > 1e-4, "{dev}");
    }

    #[test]
    fn free_particle_invariance_at_rounding_level() {
        let p = PotentialSpec::new(vec![DomainSpec::inversion(-1.0, 1.0, CellProfile::Constant(0.0)).unwrap()], 0.0, 0.0).unwrap();
        assert!(check_invariance(&p, 1, 1.1, 40).unwrap() < 1e-9);
    }
}
