//! Global basis `xi` assembled from the local symmetry bases of all domains.
//!
//! Neighboring domains are joined by matching matrices built from Wronskians
//! at the interface. Within a domain `xi = C_d chi^(d)`, so in cell `l`
//! `xi(x) = C_d Q_chi^(l - a) chi_1(F^-(l-1)(x))` where the anchor `a` is the
//! first cell for domains right of the reference domain and the last cell for
//! domains left of it.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrator::{wronskian_of, StateVector, DEFAULT_TOL};
use crate::linalg::Mat2;
use crate::lsb::{build_domain_lsb_with_tol, DomainLsb, MAX_LOG_SCALE};
use crate::potential::PotentialSpec;

/// `chi^(d) = M chi^(d+1)` at the interface `x_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingMatrix {
    pub entries: Mat2,
    /// Interface index `d` (between domains `d` and `d + 1`).
    pub interface: usize,
}

/// Matching matrix from one-sided values of the left and right bases at the
/// same point: `M_{r+} = W(l_r, r_-) / W(r_+, r_-)`, `M_{r-} = W(r_+, l_r) / W(r_+, r_-)`.
pub fn matching_matrix(
    left: &(StateVector, StateVector),
    right: &(StateVector, StateVector),
    interface: usize,
) -> Result<MatchingMatrix> {
    let w = wronskian_of(&right.0, &right.1);
    let scale = (right.0.value.norm() + right.0.derivative.norm()) * (right.1.value.norm() + right.1.derivative.norm());
    if !(w.norm() > 1e-14 * scale) || !w.is_finite() {
        return Err(Error::DegenerateRightBasis { interface });
    }
    let rows = [&left.0, &left.1];
    let mut m = Mat2::identity();
    for (r, l) in rows.iter().enumerate() {
        m.0[r][0] = wronskian_of(l, &right.1) / w;
        m.0[r][1] = wronskian_of(&right.0, l) / w;
    }
    if !m.is_finite() {
        return Err(Error::DegenerateRightBasis { interface });
    }
    Ok(MatchingMatrix { entries: m, interface })
}

/// Where a domain's cell powers are counted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    First,
    Last,
}

#[derive(Debug, Clone)]
struct DomainLink {
    anchor: Anchor,
    /// Cumulative matcher `C_d` (`M^(di)` or its backward analog).
    c: Mat2,
}

/// Continuous global basis at one energy.
#[derive(Debug, Clone)]
pub struct GlobalBasis {
    energy: f64,
    reference: usize,
    lsbs: Vec<DomainLsb>,
    links: Vec<DomainLink>,
    matchers: Vec<MatchingMatrix>,
    x_range: (f64, f64),
    leads: (f64, f64),
}

/// Builds every domain's LSB at `energy` and joins them around reference domain `i`.
pub fn build_global_basis(p: &PotentialSpec, energy: f64, reference: usize) -> Result<GlobalBasis> {
    GlobalBasis::build(p, energy, reference, DEFAULT_TOL)
}

impl GlobalBasis {
    pub fn build(p: &PotentialSpec, energy: f64, reference: usize, tol: f64) -> Result<Self> {
        let lsbs = (1..=p.num_domains())
            .map(|d| build_domain_lsb_with_tol(p, d, energy, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::from_lsbs(p, lsbs, energy, reference)
    }

    /// Joins precomputed domain bases (for instance after row rescaling).
    pub fn from_lsbs(p: &PotentialSpec, lsbs: Vec<DomainLsb>, energy: f64, reference: usize) -> Result<Self> {
        let n = lsbs.len();
        if n == 0 || n != p.num_domains() {
            return Err(Error::InvalidSpec("assembly: one local basis per domain required".into()));
        }
        if reference == 0 || reference > n {
            return Err(Error::DomainIndex { index: reference, domains: n });
        }
        let mut links: Vec<Option<DomainLink>> = (0..n).map(|_| None).collect();
        links[reference - 1] = Some(DomainLink { anchor: Anchor::First, c: Mat2::identity() });
        let mut matchers = Vec::with_capacity(n - 1);

        // forward: C_{d+1} = C_d M_d
        for d in reference..n {
            let (left, right) = (&lsbs[d - 1], &lsbs[d]);
            let x = left.spec.end;
            let cells = left.cells();
            let lpair = left.propagate_chi(cells, x)?;
            let rpair = right.propagate_chi(1, x)?;
            let m = matching_matrix(&lpair, &rpair, d)?;
            let c = links[d - 1].as_ref().map(|l| l.c).unwrap_or_else(Mat2::identity) * m.entries;
            check_scale(&c, d + 1)?;
            links[d] = Some(DomainLink { anchor: Anchor::First, c });
            matchers.push(m);
        }
        // backward: tilde-chi anchored at the last cell, C_d = C_{d+1} M~^-1
        for d in (1..reference).rev() {
            let (left, right) = (&lsbs[d - 1], &lsbs[d]);
            let x = left.spec.end;
            let cells = left.cells();
            let lpair = left.propagate_with(&Mat2::identity(), cells, x)?;
            let right_link = links[d].as_ref().expect("right link set");
            let rpair = right.propagate_with(&right_g(right, right_link, 1)?, 1, x)?;
            // match against the right basis as it appears in xi, so C_d follows directly
            let m = matching_matrix(&lpair, &rpair, d)?;
            let c = m.entries.inverse().ok_or(Error::DegenerateBasis { domain: Some(d), operation: "assembly::inverse matcher" })?;
            check_scale(&c, d)?;
            links[d - 1] = Some(DomainLink { anchor: Anchor::Last, c });
            matchers.push(m);
        }
        matchers.sort_by_key(|m| m.interface);
        let links = links.into_iter().map(|l| l.expect("all domains linked")).collect();
        Ok(GlobalBasis {
            energy,
            reference,
            lsbs,
            links,
            matchers,
            x_range: (p.x_start(), p.x_end()),
            leads: (p.lead_left, p.lead_right),
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn num_domains(&self) -> usize {
        self.lsbs.len()
    }

    pub fn lsbs(&self) -> &[DomainLsb] {
        &self.lsbs
    }

    pub fn lsb(&self, d: usize) -> Result<&DomainLsb> {
        self.lsbs.get(d.wrapping_sub(1)).ok_or(Error::DomainIndex { index: d, domains: self.lsbs.len() })
    }

    /// Matching matrices by interface. Interfaces left of the reference domain
    /// hold the matcher of the last-cell anchored basis against `xi` on the right.
    pub fn matchers(&self) -> &[MatchingMatrix] {
        &self.matchers
    }

    /// Cumulative matcher `C_d` and its anchor.
    pub fn cumulative(&self, d: usize) -> Result<(Mat2, Anchor)> {
        self.lsb(d)?;
        let link = &self.links[d - 1];
        Ok((link.c, link.anchor))
    }

    /// Integration steps spent on all domains.
    pub fn steps(&self) -> usize {
        self.lsbs.iter().map(DomainLsb::steps).sum()
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    /// Lead potentials `(left, right)`.
    pub fn leads(&self) -> (f64, f64) {
        self.leads
    }

    /// Propagation-matching matrix of cell `l` in domain `d`: `C_d Q_chi^(l-1)`
    /// for first-cell anchors and `C_d Q_chi^(l-N_d)` for last-cell anchors.
    pub fn propagation_matrix(&self, d: usize, l: usize) -> Result<Mat2> {
        let lsb = self.lsb(d)?;
        if l == 0 || l > lsb.cells() {
            return Err(Error::CellIndex { index: l, cells: lsb.cells() });
        }
        right_g(lsb, &self.links[d - 1], l)
    }

    /// `xi(x)`; at an interior boundary the value from the left side is used.
    pub fn eval(&self, x: f64) -> Result<(StateVector, StateVector)> {
        let (lo, hi) = self.x_range;
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let d = self
            .lsbs
            .iter()
            .position(|l| x <= l.spec.end)
            .map(|i| i + 1)
            .unwrap_or(self.lsbs.len());
        self.eval_in(d, x)
    }

    /// `xi(x)` using the representation of domain `d`; `x` may sit on either
    /// edge of the domain.
    pub fn eval_in(&self, d: usize, x: f64) -> Result<(StateVector, StateVector)> {
        let lsb = self.lsb(d)?;
        let (lo, hi) = (lsb.spec.start, lsb.spec.end);
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let l = if x == hi { lsb.cells() } else { lsb.spec.cell_of(x) };
        lsb.propagate_with(&self.propagation_matrix(d, l)?, l, x)
    }

    /// Constant Wronskian `W(xi_1, xi_2)`.
    pub fn wronskian(&self) -> Result<Complex64> {
        let (a, b) = self.eval_in(self.reference, self.lsbs[self.reference - 1].spec.start)?;
        Ok(wronskian_of(&a, &b))
    }

    /// `Q_xi = C_d Q_chi C_d^-1`, mapping `xi(x)` to `xi(F_d(x))`.
    pub fn domain_q_xi(&self, d: usize) -> Result<Mat2> {
        let lsb = self.lsb(d)?;
        if !lsb.is_symmetric() {
            return Err(Error::NoSymmetryMapping { domain: d });
        }
        let c = self.links[d - 1].c;
        let inv = c.inverse().ok_or(Error::DegenerateBasis { domain: Some(d), operation: "assembly::domain_q_xi" })?;
        Ok(c * *lsb.q_chi() * inv)
    }
}

fn right_g(lsb: &DomainLsb, link: &DomainLink, l: usize) -> Result<Mat2> {
    let power = match link.anchor {
        Anchor::First => l as i64 - 1,
        Anchor::Last => l as i64 - lsb.cells() as i64,
    };
    let g = link.c * lsb.q_chi_power(power)?;
    check_scale(&g, lsb.domain)?;
    Ok(g)
}

fn check_scale(m: &Mat2, domain: usize) -> Result<()> {
    let mag = m.max_abs();
    if !m.is_finite() || mag.ln() > MAX_LOG_SCALE {
        return Err(Error::ScaleOverflow { domain, log_magnitude: mag.ln() });
    }
    Ok(())
}

/// `xi` at `x` (left-side value at interior boundaries).
pub fn eval_global(g: &GlobalBasis, x: f64) -> Result<(StateVector, StateVector)> {
    g.eval(x)
}

pub fn domain_q_xi(g: &GlobalBasis, d: usize) -> Result<Mat2> {
    g.domain_q_xi(d)
}
