//! Fixed-size complex 2x2 algebra used throughout the pipeline.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::{Float, One, Zero};

/// Row-major complex 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

/// Complex 2-vector (column).
pub type Vec2 = [Complex64; 2];

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2::new(a, Complex64::zero(), Complex64::zero(), d)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[r][c]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1] / det, -m[0][1] / det, -m[1][0] / det, m[0][0] / det))
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc: f64, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[0][1].is_zero() && self.0[1][0].is_zero()
    }

    /// Integer power by repeated squaring; negative exponents use the inverse.
    pub fn powi(&self, n: i64) -> Option<Mat2> {
        let mut base = if n < 0 { self.inverse()? } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Mat2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }

    /// Frobenius distance, used by tests and diagnostics.
    pub fn dist(&self, other: &Mat2) -> f64 {
        let d = *self - *other;
        d.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

/// Solves `m x = rhs`; `None` when `m` is singular.
pub fn solve(m: &Mat2, rhs: Vec2) -> Option<Vec2> {
    m.inverse().map(|inv| inv.apply(rhs))
}

/// Complex power `z^n` computed in log form.
///
/// Returns the log-modulus alongside so callers can detect overflow before
/// the result turns into infinity.
pub fn pow_log(z: Complex64, n: i64) -> (Complex64, f64) {
    if n == 0 {
        return (Complex64::one(), 0.0);
    }
    let (r, theta) = z.to_polar();
    let log_mag = (n as f64) * r.ln();
    let phase = (n as f64) * theta;
    (Complex64::from_polar(log_mag.exp(), phase), log_mag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_matches_repeated_product() {
        let m = Mat2::new(
            Complex64::new(0.3, 0.1),
            Complex64::new(-1.2, 0.0),
            Complex64::new(0.7, 0.2),
            Complex64::new(1.1, -0.4),
        );
        let mut acc = Mat2::identity();
        for _ in 0..7 {
            acc = acc * m;
        }
        assert!(m.powi(7).unwrap().dist(&acc) < 1e-12);
        let back = m.powi(-7).unwrap() * acc;
        assert!(back.dist(&Mat2::identity()) < 1e-10);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat2::real(1.0, 2.0, 2.0, 4.0);
        assert!(m.inverse().is_none());
        assert!(solve(&m, [Complex64::one(), Complex64::zero()]).is_none());
    }

    #[test]
    fn log_power_of_unit_phase() {
        let z = Complex64::from_polar(1.0, 0.3);
        let (p, lm) = pow_log(z, 4095);
        assert!((p.norm() - 1.0).abs() < 1e-12);
        assert!(lm.abs() < 1e-12);
        let direct = Complex64::from_polar(1.0, 0.3 * 4095.0);
        assert!((p - direct).norm() < 1e-9);
    }
}
