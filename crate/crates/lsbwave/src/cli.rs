use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lsbwave", version, about = "Wave scattering and bound states in locally symmetric potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by the config-driven commands. Values given here override
/// the defaults stored in the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config with the potential (and optional defaults).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Single energy.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "energies")]
    pub energy: Option<f64>,
    /// Energy grid `E0:E1:N` (N points, both ends included).
    #[arg(long, allow_hyphen_values = true, value_name = "E0:E1:N")]
    pub energies: Option<String>,
    /// Reference domain of the global basis (1-based).
    #[arg(long)]
    pub ref_domain: Option<usize>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file (stdout if absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every domain's declared symmetry on the sampled profile.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        sym_tol: f64,
    },
    /// Spread of the two-point currents over symmetry-related pairs.
    Invariants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Restrict to one domain.
        #[arg(long)]
        domain: Option<usize>,
    },
    /// Dump the global basis on a grid.
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Transmission and reflection for a wave incident from the left.
    Scatter {
        #[command(flatten)]
        common: Common,
        /// Also dump the scattering state to this file.
        #[arg(long, value_name = "PATH")]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Lead amplitudes of psi = xi_1 + xi_2.
    Design {
        #[command(flatten)]
        common: Common,
    },
    /// Bound states in the energy window given by `--energies E0:E1:N`.
    Bound {
        #[command(flatten)]
        common: Common,
        /// `dirichlet` (hard walls at the ends) or `decaying` (into the leads).
        #[arg(long)]
        bc: Option<String>,
    },
    /// Two-point invariants under a general transform.
    GeneralCheck {
        #[command(flatten)]
        common: Common,
        /// `scale:S`, `translate:L` or `invert:A`.
        #[arg(long, allow_hyphen_values = true)]
        transform: String,
        /// Interval `a:b` the transform is applied on.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B")]
        domain: String,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Report instead of rejecting when the potential is not invariant.
        #[arg(long)]
        allow_broken: bool,
    },
    /// Brute-force scattering by a single integration across the potential.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Time LSB and direct scattering on a built-in lattice.
    Bench {
        /// Comma-separated cell counts.
        #[arg(long, default_value = "16,4096")]
        cells: String,
        #[arg(long, default_value_t = 1.3)]
        energy: f64,
        #[arg(long)]
        tol: Option<f64>,
        /// Best-of repetitions per timing.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        skip_direct: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}
