use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures of the numerical pipeline.
///
/// Every variant that can originate inside a specific domain carries the
/// domain index (1-based, as in the decomposition) so that callers can report
/// which part of the structure failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed potential or domain description.
    InvalidSpec(String),
    /// A symmetric domain does not map its potential onto itself.
    SymmetryViolation { domain: usize, deviation: f64, tol: f64 },
    /// `transform_point` called on a domain without a symmetry transform.
    NoTransform,
    /// Initial conditions of a basis pair are linearly dependent.
    LinearlyDependentInit,
    /// Query point lies outside the interval a result is defined on.
    OutOfRange { x: f64, lo: f64, hi: f64 },
    /// Cell index outside `1..=cells`.
    CellIndex { index: usize, cells: usize },
    /// Domain index outside `1..=domains`.
    DomainIndex { index: usize, domains: usize },
    /// Basis Wronskian vanished in the named operation.
    DegenerateBasis { domain: Option<usize>, operation: &'static str },
    /// `det Q` does not equal the transform sign.
    InconsistentDeterminant { det_re: f64, det_im: f64, sigma: i8 },
    /// Matching at an interface failed because the right-hand basis is degenerate.
    DegenerateRightBasis { interface: usize },
    /// Eigenvalue powers leave the floating point range.
    ScaleOverflow { domain: usize, log_magnitude: f64 },
    /// The requested domain carries no symmetry mapping.
    NoSymmetryMapping { domain: usize },
    /// Scattering requested with a closed lead channel.
    ClosedChannel { energy: f64, lead: f64 },
    /// Linear system for amplitudes is singular.
    SingularSystem(&'static str),
    /// Pure mapping needs a nonzero current.
    ZeroCurrent { current: f64 },
    /// Sampled profile has a (near-)node.
    ProfileNode { index: usize, value: f64 },
    /// Integration failed (step size underflow or non-finite state).
    IntegrationFailed { x: f64, reason: &'static str },
    /// A coordinate transform has vanishing derivative or is not monotone.
    NotBijective { x: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "potential: invalid specification: {msg}"),
            Error::SymmetryViolation { domain, deviation, tol } => write!(
                f,
                "potential: domain {domain} violates its declared symmetry (max deviation {deviation:e} > tol {tol:e})"
            ),
            Error::NoTransform => f.write_str("potential: no transform declared"),
            Error::LinearlyDependentInit => {
                f.write_str("integrator: linearly dependent initial conditions")
            }
            Error::OutOfRange { x, lo, hi } => {
                write!(f, "position {x} outside the interval [{lo}, {hi}]")
            }
            Error::CellIndex { index, cells } => {
                write!(f, "cell index {index} outside 1..={cells}")
            }
            Error::DomainIndex { index, domains } => {
                write!(f, "domain index {index} outside 1..={domains}")
            }
            Error::DegenerateBasis { domain, operation } => match domain {
                Some(d) => write!(f, "{operation}: basis degenerate in domain {d} (vanishing Wronskian)"),
                None => write!(f, "{operation}: basis degenerate (vanishing Wronskian)"),
            },
            Error::InconsistentDeterminant { det_re, det_im, sigma } => write!(
                f,
                "lsb: det Q = {det_re}{det_im:+}i inconsistent with sigma = {sigma}"
            ),
            Error::DegenerateRightBasis { interface } => {
                write!(f, "assembly: degenerate right basis at interface {interface}")
            }
            Error::ScaleOverflow { domain, log_magnitude } => write!(
                f,
                "assembly: scale overflow in domain {domain} (log|z^n| = {log_magnitude:.1})"
            ),
            Error::NoSymmetryMapping { domain } => {
                write!(f, "assembly: no symmetry mapping in domain {domain}")
            }
            Error::ClosedChannel { energy, lead } => write!(
                f,
                "solver: closed channel (energy {energy} not above lead potential {lead})"
            ),
            Error::SingularSystem(what) => write!(f, "solver: singular matching system ({what})"),
            Error::ZeroCurrent { current } => {
                write!(f, "solver: mapping undefined at zero current (J = {current:e})")
            }
            Error::ProfileNode { index, value } => write!(
                f,
                "solver: profile has (near-)node at sample {index} (|chi| = {value:e})"
            ),
            Error::IntegrationFailed { x, reason } => {
                write!(f, "integrator: failed at x = {x}: {reason}")
            }
            Error::NotBijective { x } => {
                write!(f, "general-transform: transform not bijective here (x = {x})")
            }
        }
    }
}

impl core::error::Error for Error {}
