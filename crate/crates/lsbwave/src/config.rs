//! JSON run configuration.
//!
//! ```json
//! {"domains": [{"kind": "translation", "bounds": [0, 4], "cells": 4,
//!               "profile": {"type": "cosine", "amplitude": 0.5, "period": 1}}],
//!  "leads": {"left": 0, "right": 0}}
//! ```
//!
//! A file may also wrap the potential as `{"potential": {...} | "path.json", ...}`
//! next to default command parameters (`energy`, `energies`, `ref_domain`,
//! `tol`, `bc`, `out`); command-line flags take precedence.

use std::fs;
use std::path::{Path, PathBuf};

use lsbwave_core::potential::SampledProfile;
use lsbwave_core::{CellProfile, DomainSpec, PotentialSpec, SymmetryTransform};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    Cosine {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    Gaussian {
        height: f64,
        center: f64,
        width: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    #[serde(rename = "logcosine")]
    LogCosine {
        amplitude: f64,
        ratio: f64,
        #[serde(default)]
        offset: f64,
    },
    Samples {
        x: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Inversion,
    Translation,
    None,
}

/// Whether the profile describes the first cell (mirrored or repeated) or
/// the whole domain as given.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Span {
    #[default]
    Cell,
    Domain,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub bounds: [f64; 2],
    #[serde(default)]
    pub cells: Option<usize>,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Leads {
    #[serde(default)]
    pub left: f64,
    #[serde(default)]
    pub right: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub domains: Vec<DomainConfig>,
    #[serde(default)]
    pub leads: Leads,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PotentialSource {
    Inline(PotentialConfig),
    File(PathBuf),
}

/// Command defaults that may accompany the potential in a config file.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub energy: Option<f64>,
    pub energies: Option<String>,
    pub ref_domain: Option<usize>,
    pub tol: Option<f64>,
    pub bc: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct Wrapped {
    potential: PotentialSource,
    #[serde(flatten)]
    defaults: Defaults,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
enum ConfigFile {
    Wrapped(Wrapped),
    Bare(PotentialConfig),
}

/// Parsed config file: the potential plus optional command defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub defaults: Defaults,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str, base: &Path) -> Result<Self, CliError> {
        // untagged enums hide the real problem, so try the shapes separately
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| input(format!("config: {e}")))?;
        let file = if value.get("potential").is_some() {
            ConfigFile::Wrapped(serde_json::from_value(value).map_err(|e| input(format!("config: {e}")))?)
        } else {
            ConfigFile::Bare(serde_json::from_value(value).map_err(|e| input(format!("config: {e}")))?)
        };
        match file {
            ConfigFile::Bare(potential) => Ok(RunConfig { potential, defaults: Defaults::default() }),
            ConfigFile::Wrapped(w) => {
                let potential = match w.potential {
                    PotentialSource::Inline(p) => p,
                    PotentialSource::File(path) => {
                        let path = if path.is_relative() { base.join(path) } else { path };
                        let text = read(&path)?;
                        serde_json::from_str(&text).map_err(|e| input(format!("config {}: {e}", path.display())))?
                    }
                };
                Ok(RunConfig { potential, defaults: w.defaults })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base).map_err(|e| match e {
            CliError::Input(m) => input(format!("{m} ({})", path.display())),
            other => other,
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

impl ProfileConfig {
    pub fn to_profile(&self) -> Result<CellProfile, CliError> {
        Ok(match self {
            ProfileConfig::Constant { value } => CellProfile::Constant(*value),
            ProfileConfig::Cosine { amplitude, period, phase, offset } => {
                CellProfile::Cosine { amplitude: *amplitude, period: *period, phase: *phase, offset: *offset }
            }
            ProfileConfig::Gaussian { height, center, width } => {
                CellProfile::Gaussian { height: *height, center: *center, width: *width }
            }
            ProfileConfig::Linear { intercept, slope } => CellProfile::Linear { intercept: *intercept, slope: *slope },
            ProfileConfig::LogCosine { amplitude, ratio, offset } => {
                CellProfile::LogCosine { amplitude: *amplitude, ratio: *ratio, offset: *offset }
            }
            ProfileConfig::Samples { x, v } => {
                CellProfile::Samples(SampledProfile::new(x.clone(), v.clone()).map_err(|e| input(format!("profile: {e}")))?)
            }
        })
    }
}

impl DomainConfig {
    pub fn to_domain(&self, index: usize) -> Result<DomainSpec, CliError> {
        let ctx = |e: lsbwave_core::Error| input(format!("domain {index}: {e}"));
        let [a, b] = self.bounds;
        let profile = self.to_profile_ctx(index)?;
        let (transform, cells) = match self.kind {
            DomainKind::Inversion => {
                if self.cells.is_some_and(|c| c != 2) {
                    return Err(input(format!("domain {index}: inversion domains have exactly 2 cells")));
                }
                (SymmetryTransform::inversion(0.5 * (a + b)), 2)
            }
            DomainKind::Translation => {
                let n = self.cells.ok_or_else(|| input(format!("domain {index}: translation needs \"cells\"")))?;
                if n == 0 {
                    return Err(input(format!("domain {index}: cells must be positive")));
                }
                (SymmetryTransform::translation((b - a) / n as f64), n)
            }
            DomainKind::None => {
                if self.cells.is_some_and(|c| c != 1) {
                    return Err(input(format!("domain {index}: asymmetric domains have a single cell")));
                }
                (SymmetryTransform::none(), 1)
            }
        };
        let d = DomainSpec::new(a, b, transform, cells, profile).map_err(ctx)?;
        match self.span {
            Span::Cell => Ok(d),
            Span::Domain => d.imported().map_err(ctx),
        }
    }

    fn to_profile_ctx(&self, index: usize) -> Result<CellProfile, CliError> {
        self.profile.to_profile().map_err(|e| match e {
            CliError::Input(m) => input(format!("domain {index}: {m}")),
            other => other,
        })
    }
}

impl PotentialConfig {
    pub fn domains(&self) -> Result<Vec<DomainSpec>, CliError> {
        self.domains.iter().enumerate().map(|(i, d)| d.to_domain(i + 1)).collect()
    }

    /// Builds the potential, validating the symmetry of whole-domain samples.
    pub fn build(&self) -> Result<PotentialSpec, CliError> {
        PotentialSpec::new(self.domains()?, self.leads.left, self.leads.right).map_err(CliError::from)
    }

    /// Builds the potential without symmetry validation.
    pub fn build_unchecked(&self) -> Result<PotentialSpec, CliError> {
        PotentialSpec::new_unchecked(self.domains()?, self.leads.left, self.leads.right).map_err(CliError::from)
    }
}
