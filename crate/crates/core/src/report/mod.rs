//! Scenario configuration, run summaries and plot emission for the batch front end.

mod plots;
mod selftest;

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructor::{default_band_cap, ConstructionParams, SystemBundle, DEFAULT_DENSE_FACTOR, DEFAULT_K_CAP};
use crate::group::{Group, GroupError};
use crate::rademacher::RampShape;
use crate::spectral::{RawCoeffs, RawCoeffsError, SpectralCoeffs};
use crate::verifier::{VerifyOptions, DEFAULT_GRID_FACTOR, DEFAULT_RANDOM_POINTS};

pub use plots::{emit_plots, sweep_profile, ProfileRow, PLOT_POINTS};
pub use selftest::{run_selftest, SelftestCase};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("bad f0 coefficients: {0}")]
    Coeffs(#[from] RawCoeffsError),
    #[error("{0}")]
    Invalid(String),
}

/// `f_0`: the builtin constant `"one"` or inline coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum F0Spec {
    Builtin(String),
    Inline { coeffs: RawCoeffs },
}

impl Default for F0Spec {
    fn default() -> Self {
        F0Spec::Builtin("one".into())
    }
}

impl F0Spec {
    pub fn resolve(&self, group: Group) -> Result<SpectralCoeffs, ConfigError> {
        match self {
            F0Spec::Builtin(name) if name == "one" => Ok(SpectralCoeffs::constant(group, Complex64::new(1.0, 0.0))),
            F0Spec::Builtin(name) => Err(ConfigError::Invalid(format!("unknown builtin f0 `{name}`"))),
            F0Spec::Inline { coeffs } => Ok(SpectralCoeffs::from_raw(group, coeffs)?),
        }
    }
}

/// The epsilon sequence: an explicit list or `start * ratio^i`, `i < count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    List(Vec<f64>),
    Geometric { start: f64, ratio: f64, count: usize },
}

impl EpsSpec {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            EpsSpec::List(v) => v.clone(),
            EpsSpec::Geometric { start, ratio, count } => {
                let mut out = Vec::with_capacity(*count);
                let mut e = *start;
                for _ in 0..*count {
                    out.push(e);
                    e *= ratio;
                }
                out
            }
        }
    }

    /// Parses `0.5,0.25,0.125` or `geometric:start,ratio,count`.
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::Invalid(format!("cannot parse epsilon list `{s}`"));
        if let Some(rest) = s.strip_prefix("geometric:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            return Ok(EpsSpec::Geometric {
                start: parts[0].parse().map_err(|_| bad())?,
                ratio: parts[1].parse().map_err(|_| bad())?,
                count: parts[2].parse().map_err(|_| bad())?,
            });
        }
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()
            .map(EpsSpec::List)
    }
}

/// One construction scenario. Every field but `eps` has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_group")]
    pub group: String,
    #[serde(default)]
    pub f0: F0Spec,
    pub eps: EpsSpec,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub k_cap: Option<u32>,
    #[serde(default)]
    pub band_cap: Option<u32>,
    #[serde(default)]
    pub dense_factor: Option<usize>,
    #[serde(default)]
    pub ramp: RampShape,
    #[serde(default = "default_grid_factor")]
    pub verify_grid_factor: usize,
    #[serde(default = "default_random_points")]
    pub random_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

fn default_group() -> String {
    "circle".into()
}

fn default_grid_factor() -> usize {
    DEFAULT_GRID_FACTOR
}

fn default_random_points() -> usize {
    DEFAULT_RANDOM_POINTS
}

impl ScenarioConfig {
    pub fn new(group: &str, eps: EpsSpec) -> Self {
        ScenarioConfig {
            group: group.into(),
            f0: F0Spec::default(),
            eps,
            count: None,
            k_cap: None,
            band_cap: None,
            dense_factor: None,
            ramp: RampShape::default(),
            verify_grid_factor: DEFAULT_GRID_FACTOR,
            random_points: DEFAULT_RANDOM_POINTS,
            seed: 0,
            out: None,
            report: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn group(&self) -> Result<Group, ConfigError> {
        Ok(self.group.parse()?)
    }

    /// Validated construction parameters.
    pub fn params(&self) -> Result<ConstructionParams, ConfigError> {
        let group = self.group()?;
        let epsilons = self.eps.expand();
        let params = ConstructionParams {
            f0: self.f0.resolve(group)?,
            count: self.count.unwrap_or(epsilons.len()),
            epsilons,
            k_cap: self.k_cap.unwrap_or(DEFAULT_K_CAP),
            band_cap: self.band_cap.unwrap_or_else(|| default_band_cap(group)),
            dense_factor: self.dense_factor.unwrap_or(DEFAULT_DENSE_FACTOR),
            ramp: self.ramp,
        };
        params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            grid_factor: self.verify_grid_factor,
            random_points: self.random_points,
            seed: self.seed,
        }
    }
}

/// One line per record: `k_m`, `delta_m`, `|Lambda_m|`, sup error and `mu(Omega_m)`.
pub fn summary_lines(bundle: &SystemBundle) -> Vec<String> {
    bundle
        .records
        .iter()
        .map(|r| {
            let delta = r.delta_m.map_or("-".to_string(), |d| format!("{d:.6e}"));
            format!(
                "m={} k={} delta={} |Lambda|={} B={} sup_err={:.3e} mu(Omega)={:.6} taper={}",
                r.m,
                r.k_m,
                delta,
                r.lambda.len(),
                r.bandlimit,
                r.sup_err,
                r.omega_measure,
                r.taper
            )
        })
        .collect()
}
