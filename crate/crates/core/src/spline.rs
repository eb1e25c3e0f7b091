//! Clamped cubic spline for tabulated potential profiles.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds the spline with prescribed end slopes.
    pub(crate) fn clamped(xs: Vec<f64>, ys: Vec<f64>, slope_start: f64, slope_end: f64) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidSpec("sample table needs >= 2 points and equal x/v lengths".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("sample table contains non-finite values".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("sample positions must be strictly increasing".into()));
        }

        // Tridiagonal system for the knot second derivatives (Thomas algorithm).
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mut diag = alloc::vec![0.0; n];
        let mut upper = alloc::vec![0.0; n];
        let mut lower = alloc::vec![0.0; n];
        let mut rhs = alloc::vec![0.0; n];

        diag[0] = h[0] / 3.0;
        upper[0] = h[0] / 6.0;
        rhs[0] = (ys[1] - ys[0]) / h[0] - slope_start;
        for i in 1..n - 1 {
            lower[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            upper[i] = h[i] / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        lower[n - 1] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = slope_end - (ys[n - 1] - ys[n - 2]) / h[n - 2];

        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = alloc::vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline { xs, ys, m })
    }

    pub(crate) fn start(&self) -> f64 {
        self.xs[0]
    }

    pub(crate) fn end(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    #[cfg(test)]
    pub(crate) fn eval_deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reproduces_knots_and_end_slopes() {
        let xs = vec![0.0, 0.3, 0.7, 1.0, 1.6];
        let ys = vec![1.0, -0.5, 0.25, 2.0, 0.0];
        let s = CubicSpline::clamped(xs.clone(), ys.clone(), 0.0, 0.0).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-14);
        }
        assert!(s.eval_deriv(0.0).abs() < 1e-12);
        assert!(s.eval_deriv(1.6).abs() < 1e-12);
    }

    #[test]
    fn exact_for_cubic_with_matching_slopes() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.25).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::clamped(xs, ys, df(0.0), df(2.0)).unwrap();
        for i in 0..50 {
            let x = i as f64 * 0.04;
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted_positions() {
        assert!(CubicSpline::clamped(vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0], 0.0, 0.0).is_err());
    }
}
