//! Piecewise potentials with a declared decomposition into symmetry domains.
//!
//! A domain is described by the profile of its first cell plus a symmetry
//! transform. The remaining cells are generated by applying the transform, so
//! the declared symmetry holds by construction. Imported domains instead carry
//! a sampled profile over the full domain and must pass
//! [`validate_symmetry`] before they are accepted.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Symmetry class of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    Inversion,
    Translation,
    None,
}

/// Linear coordinate transform `x -> sigma * x + rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTransform {
    pub kind: SymmetryKind,
    /// Inversion centre (inversion only).
    pub alpha: f64,
    /// Period (translation only).
    pub length: f64,
}

impl SymmetryTransform {
    pub fn inversion(alpha: f64) -> Self {
        SymmetryTransform { kind: SymmetryKind::Inversion, alpha, length: 0.0 }
    }

    pub fn translation(length: f64) -> Self {
        SymmetryTransform { kind: SymmetryKind::Translation, alpha: 0.0, length }
    }

    pub fn none() -> Self {
        SymmetryTransform { kind: SymmetryKind::None, alpha: 0.0, length: 0.0 }
    }

    /// `-1` for inversion, `+1` for translation, `0` without symmetry.
    pub fn sigma(&self) -> i8 {
        match self.kind {
            SymmetryKind::Inversion => -1,
            SymmetryKind::Translation => 1,
            SymmetryKind::None => 0,
        }
    }

    pub fn rho(&self) -> f64 {
        match self.kind {
            SymmetryKind::Inversion => 2.0 * self.alpha,
            SymmetryKind::Translation => self.length,
            SymmetryKind::None => 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind != SymmetryKind::None
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        transform_point(self, x)
    }

    /// Applies the transform `n` times (negative `n` applies the inverse).
    pub fn iterate(&self, x: f64, n: i64) -> Result<f64> {
        match self.kind {
            SymmetryKind::Inversion => Ok(if n.rem_euclid(2) == 0 { x } else { 2.0 * self.alpha - x }),
            SymmetryKind::Translation => Ok(x + n as f64 * self.length),
            SymmetryKind::None => Err(Error::NoTransform),
        }
    }
}

/// `F(x) = sigma x + rho`: `2 alpha - x` for inversion, `x + L` for translation.
pub fn transform_point(t: &SymmetryTransform, x: f64) -> Result<f64> {
    match t.kind {
        SymmetryKind::Inversion => Ok(2.0 * t.alpha - x),
        SymmetryKind::Translation => Ok(x + t.length),
        SymmetryKind::None => Err(Error::NoTransform),
    }
}

/// Potential profile over the first cell (or the whole domain for imported
/// profiles). Positions are absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum CellProfile {
    Constant(f64),
    /// `offset + amplitude * cos(2 pi x / period + phase)`
    Cosine { amplitude: f64, period: f64, phase: f64, offset: f64 },
    /// `height * exp(-(x - center)^2 / (2 width^2))`
    Gaussian { height: f64, center: f64, width: f64 },
    /// `intercept + slope * x`
    Linear { intercept: f64, slope: f64 },
    /// `offset + amplitude * cos(2 pi ln(x) / ln(ratio))`, invariant under `x -> ratio * x`.
    LogCosine { amplitude: f64, ratio: f64, offset: f64 },
    /// Tabulated values, clamped cubic interpolation with zero end slopes.
    Samples(SampledProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    spline: CubicSpline,
}

impl SampledProfile {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(SampledProfile { spline: CubicSpline::clamped(x, v, 0.0, 0.0)? })
    }

    pub fn start(&self) -> f64 {
        self.spline.start()
    }

    pub fn end(&self) -> f64 {
        self.spline.end()
    }

    pub fn positions(&self) -> &[f64] {
        self.spline.knots()
    }
}

impl CellProfile {
    pub fn samples(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(CellProfile::Samples(SampledProfile::new(x, v)?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        use core::f64::consts::PI;
        match self {
            CellProfile::Constant(v) => *v,
            CellProfile::Cosine { amplitude, period, phase, offset } => {
                offset + amplitude * (2.0 * PI * x / period + phase).cos()
            }
            CellProfile::Gaussian { height, center, width } => {
                let u = (x - center) / width;
                height * (-0.5 * u * u).exp()
            }
            CellProfile::Linear { intercept, slope } => intercept + slope * x,
            CellProfile::LogCosine { amplitude, ratio, offset } => {
                offset + amplitude * (2.0 * PI * x.ln() / ratio.ln()).cos()
            }
            CellProfile::Samples(s) => s.spline.eval(x),
        }
    }

    fn check(&self) -> Result<()> {
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        let ok = match self {
            CellProfile::Constant(v) => v.is_finite(),
            CellProfile::Cosine { amplitude, period, phase, offset } => {
                finite(&[*amplitude, *period, *phase, *offset]) && *period != 0.0
            }
            CellProfile::Gaussian { height, center, width } => {
                finite(&[*height, *center, *width]) && *width > 0.0
            }
            CellProfile::Linear { intercept, slope } => finite(&[*intercept, *slope]),
            CellProfile::LogCosine { amplitude, ratio, offset } => {
                finite(&[*amplitude, *ratio, *offset]) && *ratio > 0.0 && *ratio != 1.0
            }
            CellProfile::Samples(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec("profile parameters must be finite (period != 0, width > 0, ratio > 0 and != 1)".into()))
        }
    }
}

/// Whether a domain's profile describes its first cell or the whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSpan {
    FirstCell,
    /// Externally sampled over the whole domain; symmetry must be validated.
    Domain,
}

/// One symmetry domain `[start, end]` split into `cells` equal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub start: f64,
    pub end: f64,
    pub transform: SymmetryTransform,
    pub cells: usize,
    pub profile: CellProfile,
    pub span: ProfileSpan,
}

impl DomainSpec {
    /// Inversion-symmetric domain mirrored through its midpoint (two cells).
    pub fn inversion(start: f64, end: f64, profile: CellProfile) -> Result<Self> {
        Self::new(start, end, SymmetryTransform::inversion(0.5 * (start + end)), 2, profile)
    }

    /// Translation-symmetric domain of `cells` periods.
    pub fn translation(start: f64, end: f64, cells: usize, profile: CellProfile) -> Result<Self> {
        let period = if cells == 0 { 0.0 } else { (end - start) / cells as f64 };
        Self::new(start, end, SymmetryTransform::translation(period), cells, profile)
    }

    /// Domain without symmetry; a single cell.
    pub fn asymmetric(start: f64, end: f64, profile: CellProfile) -> Result<Self> {
        Self::new(start, end, SymmetryTransform::none(), 1, profile)
    }

    pub fn new(
        start: f64,
        end: f64,
        transform: SymmetryTransform,
        cells: usize,
        profile: CellProfile,
    ) -> Result<Self> {
        let d = DomainSpec { start, end, transform, cells, profile, span: ProfileSpan::FirstCell };
        d.check()?;
        Ok(d)
    }

    /// Marks the profile as sampled over the whole domain instead of the first cell.
    pub fn imported(mut self) -> Result<Self> {
        self.span = ProfileSpan::Domain;
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(Error::InvalidSpec("domain bounds must be finite with end > start".into()));
        }
        let width = self.end - self.start;
        let rel = 1e-12 * width.max(self.start.abs()).max(self.end.abs());
        match self.transform.kind {
            SymmetryKind::Inversion => {
                if self.cells != 2 {
                    return Err(Error::InvalidSpec("inversion domains have exactly 2 cells".into()));
                }
                if (self.transform.alpha - 0.5 * (self.start + self.end)).abs() > rel {
                    return Err(Error::InvalidSpec("inversion centre must be the domain midpoint".into()));
                }
            }
            SymmetryKind::Translation => {
                if self.cells < 2 {
                    return Err(Error::InvalidSpec("translation domains need at least 2 cells".into()));
                }
                if !(self.transform.length > 0.0)
                    || (self.transform.length * self.cells as f64 - width).abs() > rel * self.cells as f64
                {
                    return Err(Error::InvalidSpec("translation period times cell count must equal the domain width".into()));
                }
            }
            SymmetryKind::None => {
                if self.cells != 1 {
                    return Err(Error::InvalidSpec("domains without symmetry have exactly 1 cell".into()));
                }
            }
        }
        self.profile.check()?;
        if let CellProfile::Samples(s) = &self.profile {
            let (lo, hi) = match self.span {
                ProfileSpan::FirstCell => (self.start, self.start + self.cell_len()),
                ProfileSpan::Domain => (self.start, self.end),
            };
            let slack = 1e-12 * (hi - lo).max(1.0);
            if s.start() > lo + slack || s.end() < hi - slack {
                return Err(Error::InvalidSpec("sample positions must cover the full profile interval".into()));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> i8 {
        self.transform.sigma()
    }

    pub fn cell_len(&self) -> f64 {
        (self.end - self.start) / self.cells as f64
    }

    /// `[start + (l-1) c, start + l c]` for the 1-based cell index `l`.
    pub fn cell_bounds(&self, l: usize) -> Result<(f64, f64)> {
        if l == 0 || l > self.cells {
            return Err(Error::CellIndex { index: l, cells: self.cells });
        }
        let c = self.cell_len();
        let lo = self.start + (l - 1) as f64 * c;
        let hi = if l == self.cells { self.end } else { self.start + l as f64 * c };
        Ok((lo, hi))
    }

    /// 1-based cell containing `x` (left-closed cells; the last one also holds `end`).
    pub fn cell_of(&self, x: f64) -> usize {
        let t = ((x - self.start) / self.cell_len()).floor();
        if t < 0.0 {
            1
        } else {
            (t as usize + 1).min(self.cells)
        }
    }

    /// Maps `x` in cell `l` back into the first cell: `F^{-(l-1)}(x)`.
    pub fn to_first_cell(&self, x: f64, l: usize) -> f64 {
        match self.transform.kind {
            SymmetryKind::None => x,
            _ => self.transform.iterate(x, -((l as i64) - 1)).unwrap_or(x),
        }
    }

    /// Potential at `x`, treating `x` as a point of cell `l`.
    pub fn eval_in_cell(&self, x: f64, l: usize) -> f64 {
        match self.span {
            ProfileSpan::Domain => self.profile.eval(x),
            ProfileSpan::FirstCell => self.profile.eval(self.to_first_cell(x, l)),
        }
    }

    /// Potential at `x` inside this domain.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_in_cell(x, self.cell_of(x))
    }

    /// Sub-interval on which the transform applies: the whole domain for
    /// inversion, all but the last cell for translation.
    pub fn transform_region(&self) -> (f64, f64) {
        match self.transform.kind {
            SymmetryKind::Translation => (self.start, self.end - self.cell_len()),
            _ => (self.start, self.end),
        }
    }
}

/// Report of [`validate_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub max_abs_deviation: f64,
    pub pass: bool,
}

/// Ordered, contiguous domains plus constant lead potentials outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    domains: Vec<DomainSpec>,
    pub lead_left: f64,
    pub lead_right: f64,
}

/// Validation used when an imported domain enters a [`PotentialSpec`].
pub const IMPORT_SYMMETRY_TOL: f64 = 1e-9;
const IMPORT_SYMMETRY_SAMPLES: usize = 512;

impl PotentialSpec {
    /// Builds a potential; imported domains must pass symmetry validation.
    pub fn new(domains: Vec<DomainSpec>, lead_left: f64, lead_right: f64) -> Result<Self> {
        let p = Self::new_unchecked(domains, lead_left, lead_right)?;
        for (i, d) in p.domains.iter().enumerate() {
            if d.span == ProfileSpan::Domain && d.transform.is_symmetric() {
                let report = validate_symmetry(d, IMPORT_SYMMETRY_SAMPLES, IMPORT_SYMMETRY_TOL);
                if !report.pass {
                    return Err(Error::SymmetryViolation {
                        domain: i + 1,
                        deviation: report.max_abs_deviation,
                        tol: IMPORT_SYMMETRY_TOL,
                    });
                }
            }
        }
        Ok(p)
    }

    /// Structural checks only; imported domains are not symmetry-validated.
    pub fn new_unchecked(domains: Vec<DomainSpec>, lead_left: f64, lead_right: f64) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::InvalidSpec("at least one domain required".into()));
        }
        if !(lead_left.is_finite() && lead_right.is_finite()) {
            return Err(Error::InvalidSpec("lead potentials must be finite".into()));
        }
        for w in domains.windows(2) {
            let tol = 1e-12 * w[0].end.abs().max(1.0);
            if (w[1].start - w[0].end).abs() > tol {
                return Err(Error::InvalidSpec("domains must be contiguous and non-overlapping".into()));
            }
        }
        for d in &domains {
            d.check()?;
        }
        Ok(PotentialSpec { domains, lead_left, lead_right })
    }

    pub fn domains(&self) -> &[DomainSpec] {
        &self.domains
    }

    pub fn num_domains(&self) -> usize {
        self.domains.len()
    }

    /// 1-based domain lookup.
    pub fn domain(&self, d: usize) -> Result<&DomainSpec> {
        if d == 0 || d > self.domains.len() {
            return Err(Error::DomainIndex { index: d, domains: self.domains.len() });
        }
        Ok(&self.domains[d - 1])
    }

    pub fn x_start(&self) -> f64 {
        self.domains[0].start
    }

    pub fn x_end(&self) -> f64 {
        self.domains[self.domains.len() - 1].end
    }

    /// Domain boundaries `x_0 < x_1 < ... < x_N`.
    pub fn boundaries(&self) -> Vec<f64> {
        core::iter::once(self.x_start()).chain(self.domains.iter().map(|d| d.end)).collect()
    }

    /// 1-based `(domain, cell)` containing `x`; intervals are left-closed and
    /// the last domain also holds `x_N`.
    pub fn locate(&self, x: f64) -> Option<(usize, usize)> {
        if !(x >= self.x_start() && x <= self.x_end()) {
            return None;
        }
        let n = self.domains.len();
        let idx = self.domains.iter().position(|d| x < d.end).unwrap_or(n - 1);
        let d = &self.domains[idx];
        Some((idx + 1, d.cell_of(x)))
    }

    /// `V(x)`; lead values outside `[x_0, x_N]`.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x < self.x_start() {
            return self.lead_left;
        }
        if x > self.x_end() {
            return self.lead_right;
        }
        match self.locate(x) {
            Some((d, l)) => self.domains[d - 1].eval_in_cell(x, l),
            None => f64::NAN,
        }
    }

    /// Potential restricted to one cell, evaluated without domain lookup so that
    /// values at the cell edges are the one-sided limits from inside the cell.
    pub fn cell_view(&self, d: usize, l: usize) -> Result<CellView> {
        let dom = self.domain(d)?;
        let (lo, hi) = dom.cell_bounds(l)?;
        Ok(CellView { domain: dom.clone(), cell: l, lo, hi })
    }
}

/// [`PotentialSpec::cell_view`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellView {
    domain: DomainSpec,
    cell: usize,
    pub lo: f64,
    pub hi: f64,
}

impl CellView {
    pub fn eval(&self, x: f64) -> f64 {
        self.domain.eval_in_cell(x, self.cell)
    }
}

/// Maximum `|V(F(x)) - V(x)|` over the transform region of a domain.
///
/// Uses `n_samples` evenly spaced points; for sampled profiles every table
/// position (and its preimage) inside the region is checked as well.
pub fn validate_symmetry(d: &DomainSpec, n_samples: usize, tol: f64) -> SymmetryReport {
    if !d.transform.is_symmetric() {
        return SymmetryReport { max_abs_deviation: 0.0, pass: true };
    }
    let (lo, hi) = d.transform_region();
    let n = n_samples.max(2);
    let mut points: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
    if let CellProfile::Samples(s) = &d.profile {
        for &x in s.positions() {
            if x >= lo && x <= hi {
                points.push(x);
            }
            if let Ok(pre) = d.transform.iterate(x, -1) {
                if pre >= lo && pre <= hi {
                    points.push(pre);
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for x in points {
        let l = d.cell_of(x);
        let v = d.eval_in_cell(x, l);
        let (y, ly) = match d.transform.kind {
            SymmetryKind::Inversion => (2.0 * d.transform.alpha - x, 3 - l),
            _ => (x + d.transform.length, l + 1),
        };
        let dev = (d.eval_in_cell(y, ly.min(d.cells)) - v).abs();
        worst = if dev.is_nan() { f64::INFINITY } else { worst.max(dev) };
    }
    SymmetryReport { max_abs_deviation: worst, pass: worst <= tol }
}
