//! Two-point invariants for arbitrary smooth bijections `y = F(x)`.
//!
//! A solution `psi_F` of the equation written in the transformed coordinate,
//! `F''(x) psi_F' + F'(x)^2 psi_F'' = 2 (V(y) - E) psi_F` with `x = F^-1(y)`,
//! pairs with a solution `psi` of the ordinary equation into the constant
//! `Q_F = [psi(x) F'(x) psi_F'(y) - psi'(x) psi_F(y)] / 2i` wherever
//! `V(F(x)) = V(x)`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{integrate_cell, integrate_system, Coefficients, DenseSystem, StateVector};
use crate::invariants::{bilinear, mean_and_spread};
use crate::linalg::Mat2;
use crate::potential::PotentialSpec;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coordinate transform given by evaluators for `F`, `F'`, `F''` and `F^-1`.
#[derive(Clone)]
pub struct GeneralTransform {
    f: RealFn,
    f_prime: RealFn,
    f_second: RealFn,
    f_inverse: RealFn,
    /// `D`, with `F(D) = image`.
    pub domain: (f64, f64),
    pub image: (f64, f64),
}

impl fmt::Debug for GeneralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralTransform").field("domain", &self.domain).field("image", &self.image).finish_non_exhaustive()
    }
}

const CHECK_SAMPLES: usize = 257;

impl GeneralTransform {
    /// Builds and checks a transform: strictly monotone on sampled points of
    /// `domain` (a necessary condition only) and `F(F^-1(y)) = y` to 1e-10.
    pub fn custom<F, D1, D2, I>(f: F, f_prime: D1, f_second: D2, f_inverse: I, domain: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::InvalidSpec("general: domain must be a finite interval a < b".into()));
        }
        let (ya, yb) = (f(domain.0), f(domain.1));
        let image = if ya <= yb { (ya, yb) } else { (yb, ya) };
        let t = GeneralTransform {
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            f_second: Arc::new(f_second),
            f_inverse: Arc::new(f_inverse),
            domain,
            image,
        };
        t.check()?;
        Ok(t)
    }

    pub fn translation(length: f64, domain: (f64, f64)) -> Result<Self> {
        Self::custom(move |x| x + length, |_| 1.0, |_| 0.0, move |y| y - length, domain)
    }

    pub fn inversion(alpha: f64, domain: (f64, f64)) -> Result<Self> {
        Self::custom(move |x| 2.0 * alpha - x, |_| -1.0, |_| 0.0, move |y| 2.0 * alpha - y, domain)
    }

    /// `F(x) = factor * x`.
    pub fn scaling(factor: f64, domain: (f64, f64)) -> Result<Self> {
        if factor == 0.0 {
            return Err(Error::NotBijective { x: domain.0 });
        }
        Self::custom(move |x| factor * x, move |_| factor, |_| 0.0, move |y| y / factor, domain)
    }

    fn check(&self) -> Result<()> {
        let (a, b) = self.domain;
        let mut prev: Option<f64> = None;
        let mut dir = 0.0;
        for j in 0..CHECK_SAMPLES {
            let x = a + (b - a) * j as f64 / (CHECK_SAMPLES - 1) as f64;
            let y = self.apply(x);
            if !y.is_finite() || !(self.derivative(x).abs() > 0.0) {
                return Err(Error::NotBijective { x });
            }
            if let Some(p) = prev {
                let step = (y - p).signum();
                if y == p || (dir != 0.0 && step != dir) {
                    return Err(Error::NotBijective { x });
                }
                dir = step;
            }
            prev = Some(y);
            if (self.apply(self.inverse(y)) - y).abs() > 1e-10 * y.abs().max(1.0) {
                return Err(Error::NotBijective { x });
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        (self.f_second)(x)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (self.f_inverse)(y)
    }
}

/// `F'' = 0` and `F'^2 = 1` (to 1e-10) at `n_samples` points of the domain,
/// i.e. `F(x) = sigma x + rho`.
pub fn isometry_check(t: &GeneralTransform, n_samples: usize) -> bool {
    let n = n_samples.max(2);
    let (a, b) = t.domain;
    (0..n).all(|j| {
        let x = a + (b - a) * j as f64 / (n - 1) as f64;
        let d = t.derivative(x);
        t.second_derivative(x).abs() <= 1e-10 && (d * d - 1.0).abs() <= 1e-10
    })
}

/// Solutions of the transformed equation on the image interval.
#[derive(Debug, Clone)]
pub struct TransformedSolution {
    pub energy: f64,
    system: DenseSystem,
}

fn transformed_coefficients(p: &PotentialSpec, t: &GeneralTransform, energy: f64) -> Coefficients {
    let (p, t) = (p.clone(), t.clone());
    Arc::new(move |y| {
        let x = t.inverse(y);
        let d = t.derivative(x);
        let d2 = d * d;
        (-t.second_derivative(x) / d2, 2.0 * (p.evaluate(y) - energy) / d2)
    })
}

/// Integrates the transformed equation across the image of `t` from initial
/// values `(psi_F, dpsi_F/dy)` given at `inits[i].x` (an end of the image).
pub fn integrate_transformed_system(
    p: &PotentialSpec,
    energy: f64,
    t: &GeneralTransform,
    inits: &[StateVector],
    tol: f64,
) -> Result<TransformedSolution> {
    let (lo, hi) = t.image;
    let start = inits.first().map(|s| s.x).unwrap_or(lo);
    if start != lo && start != hi {
        return Err(Error::OutOfRange { x: start, lo, hi });
    }
    let (a, b) = t.domain;
    for j in 0..CHECK_SAMPLES {
        let x = a + (b - a) * j as f64 / (CHECK_SAMPLES - 1) as f64;
        if !(t.derivative(x).abs() > 1e-14) {
            return Err(Error::NotBijective { x });
        }
    }
    let end = if start == lo { hi } else { lo };
    let coeffs = transformed_coefficients(p, t, energy);
    let pairs: Vec<(Complex64, Complex64)> = inits.iter().map(|s| (s.value, s.derivative)).collect();
    let system = integrate_system(coeffs, start, end, &pairs, tol)?;
    Ok(TransformedSolution { energy, system })
}

pub fn integrate_transformed(p: &PotentialSpec, energy: f64, t: &GeneralTransform, init: StateVector, tol: f64) -> Result<TransformedSolution> {
    integrate_transformed_system(p, energy, t, &[init], tol)
}

impl TransformedSolution {
    pub fn count(&self) -> usize {
        self.system.count()
    }

    pub fn steps(&self) -> usize {
        self.system.steps()
    }

    /// `(psi_F(y), dpsi_F/dy)` of solution `i`.
    pub fn eval(&self, i: usize, y: f64) -> Result<StateVector> {
        self.system.eval(i, y)
    }

    /// Largest `|dpsi_F(b) - dpsi_F(a) - int_a^b psi_F'' dy|` over `n` equal
    /// subintervals, with `psi_F''` taken from the transformed equation and
    /// integrated by 5-point Gauss-Legendre quadrature.
    pub fn residual(&self, i: usize, n: usize) -> Result<f64> {
        const NODES: [f64; 5] = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906179845938664, 0.906179845938664];
        const WEIGHTS: [f64; 5] = [0.5688888888888889, 0.47862867049936647, 0.47862867049936647, 0.23692688505618908, 0.23692688505618908];
        let (lo, hi) = self.system.interval();
        let n = n.max(1);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let a = lo + (hi - lo) * j as f64 / n as f64;
            let b = lo + (hi - lo) * (j + 1) as f64 / n as f64;
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut integral = Complex64::new(0.0, 0.0);
            for (u, w) in NODES.iter().zip(WEIGHTS) {
                let y = mid + half * u;
                let s = self.eval(i, y)?;
                let (ca, cb) = (self.system.coefficients())(y);
                integral += (s.derivative * ca + s.value * cb) * (w * half);
            }
            let jump = self.eval(i, b)?.derivative - self.eval(i, a)?.derivative;
            worst = worst.max((jump - integral).norm());
        }
        Ok(worst)
    }
}

/// `[psi(x) F'(x) dpsi_F(y) - psi'(x) psi_F(y)] / 2i`.
pub fn q_general(psi_at_x: &StateVector, psi_f_at_y: &StateVector, f_prime_at_x: f64) -> Complex64 {
    bilinear(psi_at_x, psi_f_at_y, f_prime_at_x)
}

/// [`q_general`] with `psi` replaced by its conjugate.
pub fn q_tilde_general(psi_at_x: &StateVector, psi_f_at_y: &StateVector, f_prime_at_x: f64) -> Complex64 {
    bilinear(&psi_at_x.conj(), psi_f_at_y, f_prime_at_x)
}

/// `Q_F = (2i / w) [[-q21, q11], [-q22, q12]]` mapping `phi(x)` to `phi_F(F(x))`.
pub fn q_f_matrix(q: &[[Complex64; 2]; 2], wronskian: Complex64) -> Mat2 {
    let s = Complex64::new(0.0, 2.0) / wronskian;
    Mat2::new(-q[1][0] * s, q[0][0] * s, -q[1][1] * s, q[0][1] * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralInvarianceReport {
    /// Largest `|max - min|` of any `q^F_{m nbar}` over the sampled pairs.
    pub spread: f64,
    pub mean: [[Complex64; 2]; 2],
    /// Largest `|phi_F(F(x)) - Q_F phi(x)|` relative to `1 + |phi_F|`.
    pub mapping_residual: f64,
    /// Largest `|V(F(x)) - V(x)|` on the samples.
    pub symmetry_deviation: f64,
}

/// Tolerance on `|V(F(x)) - V(x)|` for [`check_general_invariance`].
pub const GENERAL_SYMMETRY_TOL: f64 = 1e-9;

/// Validates `V(F(x)) = V(x)` on `interval`, then measures the constancy of
/// `q^F_{m nbar}` over `n_pairs` pairs `(x, F(x))`.
pub fn check_general_invariance(
    p: &PotentialSpec,
    interval: (f64, f64),
    t: &GeneralTransform,
    energy: f64,
    n_pairs: usize,
    tol: f64,
) -> Result<GeneralInvarianceReport> {
    let report = general_invariance_spread(p, interval, t, energy, n_pairs, tol)?;
    if report.symmetry_deviation > GENERAL_SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { domain: 0, deviation: report.symmetry_deviation, tol: GENERAL_SYMMETRY_TOL });
    }
    Ok(report)
}

/// [`check_general_invariance`] without the symmetry gate, for diagnosing
/// broken symmetries.
pub fn general_invariance_spread(
    p: &PotentialSpec,
    interval: (f64, f64),
    t: &GeneralTransform,
    energy: f64,
    n_pairs: usize,
    tol: f64,
) -> Result<GeneralInvarianceReport> {
    let (a, b) = interval;
    if !(a < b) || a < t.domain.0 || b > t.domain.1 {
        return Err(Error::OutOfRange { x: if a < t.domain.0 { a } else { b }, lo: t.domain.0, hi: t.domain.1 });
    }
    let (x0, x1) = (p.x_start(), p.x_end());
    if a < x0 || b > x1 || t.image.0 < x0 || t.image.1 > x1 {
        return Err(Error::OutOfRange { x: if a < x0 { a } else { t.image.1.max(b) }, lo: x0, hi: x1 });
    }
    let pot = p.clone();
    let phi = integrate_cell(move |x| pot.evaluate(x), energy, (a, b), StateVector::real(1.0, 0.0, a), StateVector::real(0.0, 1.0, a), tol)?;
    let y0 = t.image.0;
    let phi_f = integrate_transformed_system(p, energy, t, &[StateVector::real(1.0, 0.0, y0), StateVector::real(0.0, 1.0, y0)], tol)?;

    let n = n_pairs.max(2);
    let mut samples = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    let mut deviation: f64 = 0.0;
    for j in 0..n {
        let x = a + (b - a) * j as f64 / (n - 1) as f64;
        let y = t.apply(x).clamp(t.image.0, t.image.1);
        deviation = deviation.max((p.evaluate(y) - p.evaluate(x)).abs());
        let (p1, p2) = phi.eval(x)?;
        let (f1, f2) = (phi_f.eval(0, y)?, phi_f.eval(1, y)?);
        let d = t.derivative(x);
        samples.push([[q_general(&p1, &f1, d), q_general(&p1, &f2, d)], [q_general(&p2, &f1, d), q_general(&p2, &f2, d)]]);
        pairs.push(((p1, p2), (f1, f2)));
    }
    let (mean, spread) = mean_and_spread(&samples);
    let spread = spread.iter().flatten().fold(0.0, |m: f64, v| m.max(*v));

    let w = phi.wronskian(a)?;
    let q_f = q_f_matrix(&mean, w);
    let mut mapping_residual: f64 = 0.0;
    for ((p1, p2), (f1, f2)) in &pairs {
        let mapped = q_f.apply([p1.value, p2.value]);
        mapping_residual = mapping_residual
            .max((mapped[0] - f1.value).norm() / (1.0 + f1.value.norm()))
            .max((mapped[1] - f2.value).norm() / (1.0 + f2.value.norm()));
    }
    Ok(GeneralInvarianceReport { spread, mean, mapping_residual, symmetry_deviation: deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::schrodinger;
    use crate::invariants::two_point_currents;
    use crate::potential::{CellProfile, DomainSpec};
    use alloc::vec;

    fn log_periodic(ratio: f64) -> PotentialSpec {
        let prof = CellProfile::LogCosine { amplitude: 1.0, ratio, offset: 0.0 };
        PotentialSpec::new(vec![DomainSpec::asymmetric(1.0, 4.0, prof).unwrap()], 0.0, 0.0).unwrap()
    }

    #[test]
    fn isometries_detected() {
        assert!(isometry_check(&GeneralTransform::translation(1.5, (0.0, 2.0)).unwrap(), 50));
        assert!(isometry_check(&GeneralTransform::inversion(1.0, (0.0, 1.0)).unwrap(), 50));
        assert!(!isometry_check(&GeneralTransform::scaling(2.0, (1.0, 2.0)).unwrap(), 50));
    }

    #[test]
    fn non_monotone_rejected() {
        let t = GeneralTransform::custom(|x| x * x, |x| 2.0 * x, |_| 2.0, |y: f64| y.sqrt(), (-1.0, 1.0));
        assert!(matches!(t, Err(Error::NotBijective { .. })));
        let bad_inverse = GeneralTransform::custom(|x| 2.0 * x, |_| 2.0, |_| 0.0, |y| y / 3.0, (1.0, 2.0));
        assert!(matches!(bad_inverse, Err(Error::NotBijective { .. })));
    }

    #[test]
    fn translation_reduces_to_ordinary_equation() {
        let p = log_periodic(2.0);
        let t = GeneralTransform::translation(1.0, (1.0, 3.0)).unwrap();
        let e = 0.6;
        let init = StateVector::real(0.4, -1.1, 2.0);
        let s = integrate_transformed(&p, e, &t, init, 1e-11).unwrap();
        let pot = p.clone();
        let plain = integrate_system(schrodinger(move |x| pot.evaluate(x), e), 2.0, 4.0, &[(init.value, init.derivative)], 1e-11).unwrap();
        for j in 0..=20 {
            let y = 2.0 + 0.1 * j as f64;
            let (a, b) = (s.eval(0, y).unwrap(), plain.eval(0, y).unwrap());
            assert!((a.value - b.value).norm() < 1e-9 && (a.derivative - b.derivative).norm() < 1e-9);
        }
    }

    #[test]
    fn scaling_of_free_wave() {
        let p = PotentialSpec::new(vec![DomainSpec::asymmetric(0.0, 4.0, CellProfile::Constant(0.0)).unwrap()], 0.0, 0.0).unwrap();
        let t = GeneralTransform::scaling(2.0, (1.0, 2.0)).unwrap();
        let k: f64 = 1.4;
        let e = 0.5 * k * k;
        let wave = |y: f64| StateVector::new(Complex64::from_polar(1.0, k * y / 2.0), Complex64::new(0.0, k / 2.0) * Complex64::from_polar(1.0, k * y / 2.0), y);
        let s = integrate_transformed(&p, e, &t, wave(2.0), 1e-11).unwrap();
        for j in 0..=10 {
            let y = 2.0 + 0.2 * j as f64;
            assert!((s.eval(0, y).unwrap().value - wave(y).value).norm() < 1e-9);
        }
    }

    #[test]
    fn log_periodic_residual() {
        let p = log_periodic(2.0);
        let t = GeneralTransform::scaling(2.0, (1.0, 2.0)).unwrap();
        let tol = 1e-10;
        let s = integrate_transformed(&p, 0.8, &t, StateVector::real(1.0, 0.3, 2.0), tol).unwrap();
        assert!(s.residual(0, 40).unwrap() <= 100.0 * tol);
    }

    #[test]
    fn q_general_reductions() {
        let psi = StateVector::new(Complex64::new(0.3, 0.8), Complex64::new(-1.2, 0.5), 0.0);
        // identity transform with psi_F = psi*: minus the physical current
        assert!((q_general(&psi, &psi.conj(), 1.0) + psi.current()).norm() < 1e-15);
        let other = StateVector::new(Complex64::new(-0.4, 0.1), Complex64::new(0.9, 2.0), 1.0);
        let c = two_point_currents(&psi, &other, 1);
        assert!((q_general(&psi, &other, 1.0) - c.q).norm() < 1e-15);
        assert!((q_tilde_general(&psi, &other, 1.0) - c.q_tilde).norm() < 1e-15);
        let c = two_point_currents(&psi, &other, -1);
        assert!((q_general(&psi, &other, -1.0) - c.q).norm() < 1e-15);

        let k: f64 = 0.9;
        for &x in &[1.0, 1.3, 1.9] {
            let y = 2.0 * x;
            let psi = StateVector::new(Complex64::from_polar(1.0, k * x), Complex64::new(0.0, k) * Complex64::from_polar(1.0, k * x), x);
            let back = StateVector::new(Complex64::from_polar(1.0, -k * y / 2.0), Complex64::new(0.0, -k / 2.0) * Complex64::from_polar(1.0, -k * y / 2.0), y);
            assert!((q_general(&psi, &back, 2.0) + k).norm() < 1e-14);
        }
    }

    #[test]
    fn isometric_q_f_equals_two_point_q() {
        let prof = CellProfile::Cosine { amplitude: 0.7, period: 1.0, phase: 0.2, offset: 0.0 };
        let p = PotentialSpec::new(vec![DomainSpec::translation(0.0, 4.0, 4, prof).unwrap()], 0.0, 0.0).unwrap();
        let e = 0.9;
        let t = GeneralTransform::translation(1.0, (0.0, 3.0)).unwrap();
        let pot = p.clone();
        let phi = integrate_cell(move |x| pot.evaluate(x), e, (0.0, 4.0), StateVector::real(1.0, 0.0, 0.0), StateVector::real(0.0, 1.0, 0.0), 1e-11)
            .unwrap();
        let (a, b) = phi.eval(1.0).unwrap();
        let f = integrate_transformed_system(&p, e, &t, &[a, b], 1e-11).unwrap();
        for j in 0..10 {
            let x = 0.3 * j as f64;
            let (p1, p2) = phi.eval(x).unwrap();
            let (f1, f2) = (f.eval(0, x + 1.0).unwrap(), f.eval(1, x + 1.0).unwrap());
            for (m, n) in [(&p1, &f1), (&p1, &f2), (&p2, &f1), (&p2, &f2)] {
                assert!((q_general(m, n, 1.0) - two_point_currents(m, n, 1).q).norm() <= 1e-10);
            }
        }
        let report = check_general_invariance(&p, (0.0, 3.0), &t, e, 30, 1e-11).unwrap();
        assert!(report.spread < 1e-8 && report.mapping_residual < 1e-7);
    }

    #[test]
    fn log_periodic_scaling_invariance() {
        let p = log_periodic(2.0);
        let t = GeneralTransform::scaling(2.0, (1.0, 2.0)).unwrap();
        for &e in &[0.3, 1.7] {
            let r = check_general_invariance(&p, (1.0, 2.0), &t, e, 50, 1e-10).unwrap();
            assert!(r.spread <= 1e-6, "{}", r.spread);
            assert!(r.mapping_residual <= 1e-7, "{}", r.mapping_residual);
        }
    }

    #[test]
    fn broken_scaling_symmetry_detected() {
        let p = log_periodic(2.3);
        let t = GeneralTransform::scaling(2.0, (1.0, 2.0)).unwrap();
        let r = general_invariance_spread(&p, (1.0, 2.0), &t, 0.3, 50, 1e-10).unwrap();
        assert!(r.spread > 1e-3);
        assert!(matches!(check_general_invariance(&p, (1.0, 2.0), &t, 0.3, 50, 1e-10), Err(Error::SymmetryViolation { .. })));
    }
}
