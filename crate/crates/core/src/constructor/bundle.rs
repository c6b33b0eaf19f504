use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConstructionParams, Taper};
use crate::dyadic::{shrink_cores, Cores, DyadicError, DyadicTree, PolarCap};
use crate::group::{Group, GroupError, IrrepLabel};
use crate::rademacher::{RampShape, WindowEnvelope, Window, WindowedFunction};
use crate::spectral::{RawCoeffs, RawCoeffsError, SpectralCoeffs};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot read bundle: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed bundle JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported bundle version {found} (expected {BUNDLE_VERSION})")]
    Version { found: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Coeffs(#[from] RawCoeffsError),
    #[error(transparent)]
    Tree(#[from] DyadicError),
    #[error("inconsistent bundle: {0}")]
    Inconsistent(String),
}

/// Construction settings stored alongside the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleParams {
    pub k_cap: u32,
    pub band_cap: u32,
    pub dense_factor: usize,
    pub ramp: RampShape,
    pub count: usize,
}

/// One function `f_m` of the system with its bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemRecord {
    pub m: usize,
    pub k_m: u32,
    /// `None` for `m = 1`, which is approximated to `eps_1` directly.
    pub delta_m: Option<f64>,
    /// `Lambda_m`, the union of the earlier spectral supports.
    pub lambda: Vec<IrrepLabel>,
    pub coeffs: SpectralCoeffs,
    /// Sweep intervals of the cores `K_j^{k_m}` whose union is `Omega_m`.
    pub omega: Vec<(f64, f64)>,
    /// Polar cap fraction removed from every core on SU(2).
    pub polar_cap: Option<f64>,
    pub omega_measure: f64,
    /// `sup |f_m - psi_{k_m}|` on the construction's dense grid.
    pub sup_err: f64,
    pub bandlimit: u32,
    pub taper: Taper,
}

impl SystemRecord {
    pub fn cores(&self, tree: &DyadicTree) -> Cores {
        let cells = tree.cells(self.k_m).unwrap_or_default();
        Cores {
            level: self.k_m,
            cells,
            intervals: self.omega.clone(),
            polar_cap: self.polar_cap.map(PolarCap::from_fraction),
        }
    }
}

/// The constructed system, possibly only a prefix of it.
#[derive(Clone, Debug)]
pub struct SystemBundle {
    pub f0: SpectralCoeffs,
    pub epsilons: Vec<f64>,
    pub params: BundleParams,
    pub tree: DyadicTree,
    pub records: Vec<SystemRecord>,
    pub partial: bool,
    pub failure: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct LevelFile {
    k: u32,
    boundaries: Vec<f64>,
    cores: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    k_max: u32,
    levels: Vec<LevelFile>,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    m: usize,
    k_m: u32,
    delta_m: Option<f64>,
    lambda: Vec<String>,
    coeffs: RawCoeffs,
    omega: Vec<[f64; 2]>,
    polar_cap: Option<f64>,
    omega_measure: f64,
    sup_err: f64,
    bandlimit: u32,
    taper: Taper,
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    version: u32,
    group: String,
    f0: RawCoeffs,
    epsilons: Vec<f64>,
    partial: bool,
    failure: Option<String>,
    params: BundleParams,
    tree: TreeFile,
    records: Vec<RecordFile>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<serde_json::Value>,
}

fn pairs(v: &[(f64, f64)]) -> Vec<[f64; 2]> {
    v.iter().map(|&(a, b)| [a, b]).collect()
}

impl SystemBundle {
    pub fn group(&self) -> Group {
        self.f0.group()
    }

    pub fn construction_params(&self) -> ConstructionParams {
        ConstructionParams {
            f0: self.f0.clone(),
            epsilons: self.epsilons.clone(),
            count: self.params.count,
            k_cap: self.params.k_cap,
            band_cap: self.params.band_cap,
            dense_factor: self.params.dense_factor,
            ramp: self.params.ramp,
        }
    }

    /// `psi_{k_m}` for record index `i`.
    pub fn psi(&self, i: usize) -> Result<WindowedFunction, DyadicError> {
        let r = &self.records[i];
        let env = WindowEnvelope::new(&self.tree, r.k_m, self.params.ramp)?;
        Ok(WindowedFunction::from_parts(&self.f0, env, Window::Ramped))
    }

    pub fn to_json(&self) -> String {
        let k_max = self.tree.k_max();
        let levels = (1..=k_max)
            .map(|k| {
                let cores = shrink_cores(&self.tree, k).expect("level within tree");
                LevelFile {
                    k,
                    boundaries: self.tree.boundaries(k).expect("level within tree").to_vec(),
                    cores: pairs(&cores.intervals),
                }
            })
            .collect();
        let file = BundleFile {
            version: BUNDLE_VERSION,
            group: self.group().to_string(),
            f0: self.f0.to_raw(),
            epsilons: self.epsilons.clone(),
            partial: self.partial,
            failure: self.failure.clone(),
            params: self.params.clone(),
            tree: TreeFile { k_max, levels },
            records: self
                .records
                .iter()
                .map(|r| RecordFile {
                    m: r.m,
                    k_m: r.k_m,
                    delta_m: r.delta_m,
                    lambda: r.lambda.iter().map(|l| l.to_string()).collect(),
                    coeffs: r.coeffs.to_raw(),
                    omega: pairs(&r.omega),
                    polar_cap: r.polar_cap,
                    omega_measure: r.omega_measure,
                    sup_err: r.sup_err,
                    bandlimit: r.bandlimit,
                    taper: r.taper,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, BundleError> {
        let probe: VersionProbe = serde_json::from_str(s)?;
        match probe.version.as_ref().and_then(|v| v.as_u64()) {
            Some(v) if v == BUNDLE_VERSION as u64 => {}
            Some(v) => return Err(BundleError::Version { found: v }),
            None => return Err(BundleError::Inconsistent("missing or non-integer version".into())),
        }
        let file: BundleFile = serde_json::from_str(s)?;
        let group: Group = file.group.parse()?;
        let f0 = SpectralCoeffs::from_raw(group, &file.f0)?;
        let mut levels = Vec::with_capacity(file.tree.levels.len());
        for (i, level) in file.tree.levels.into_iter().enumerate() {
            if level.k as usize != i + 1 {
                return Err(BundleError::Inconsistent(format!("tree level {} out of order", level.k)));
            }
            levels.push(level.boundaries);
        }
        if levels.len() != file.tree.k_max as usize {
            return Err(BundleError::Inconsistent("tree k_max does not match its levels".into()));
        }
        let tree = DyadicTree::from_boundaries(group, levels)?;
        let mut records = Vec::with_capacity(file.records.len());
        for r in file.records {
            let lambda = r
                .lambda
                .iter()
                .map(|s| IrrepLabel::parse(group, s))
                .collect::<Result<Vec<_>, _>>()?;
            records.push(SystemRecord {
                m: r.m,
                k_m: r.k_m,
                delta_m: r.delta_m,
                lambda,
                coeffs: SpectralCoeffs::from_raw(group, &r.coeffs)?,
                omega: r.omega.iter().map(|p| (p[0], p[1])).collect(),
                polar_cap: r.polar_cap,
                omega_measure: r.omega_measure,
                sup_err: r.sup_err,
                bandlimit: r.bandlimit,
                taper: r.taper,
            });
        }
        Ok(SystemBundle {
            f0,
            epsilons: file.epsilons,
            params: file.params,
            tree,
            records,
            partial: file.partial,
            failure: file.failure,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), BundleError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, BundleError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
