//! Inductive construction of the system `f_1, f_2, ...`.
//!
//! `f_1` approximates `psi_1` uniformly to `eps_1`. For `m > 1`, with
//! `Lambda_m` the union of the earlier spectral supports, `delta_m` is
//! `min(eps_m / 3, 1 / sum_{Lambda_m} d^{5/2})`, `k_m` is the first level whose
//! `psi_k` has small coefficients on `Lambda_m`, `xi_m` approximates
//! `psi_{k_m}` to `delta_m^2`, and `f_m` is `xi_m` with its coefficients on
//! `Lambda_m` removed.

mod approx;
mod bundle;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dyadic::{shrink_cores, DyadicError, DyadicTree};
use crate::group::{Group, IrrepLabel};
use crate::rademacher::{psi_coeffs, RampShape, WindowedFunction};
use crate::spectral::{entrywise_l1, zero_on_set, GroupFunction, SpectralCoeffs};

pub use approx::{
    approximate_uniformly, coefficients_up_to, dense_grid, sup_distance, within_cap, ApproxError, Approximation,
    Taper, MIN_DENSE_SWEEP, MIN_DENSE_SWEEP_SU2,
};
pub use bundle::{BundleError, BundleParams, SystemBundle, SystemRecord, BUNDLE_VERSION};

pub const DEFAULT_K_CAP: u32 = 12;
pub const DEFAULT_DENSE_FACTOR: usize = 8;

/// Default bandlimit cap: `|n|` on the circle, per axis on the torus, `2j`
/// on SU(2).
pub fn default_band_cap(group: Group) -> u32 {
    match group {
        Group::Circle => 65536,
        Group::Torus(_) => 64,
        Group::Su2 => 32,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionParams {
    pub f0: SpectralCoeffs,
    pub epsilons: Vec<f64>,
    /// Number `M` of functions to build.
    pub count: usize,
    pub k_cap: u32,
    /// Largest search bandlimit: `|n|` on the circle and torus, `2j` on SU(2).
    pub band_cap: u32,
    pub dense_factor: usize,
    pub ramp: RampShape,
}

impl ConstructionParams {
    pub fn new(f0: SpectralCoeffs, epsilons: Vec<f64>) -> Self {
        let group = f0.group();
        ConstructionParams {
            f0,
            count: epsilons.len(),
            epsilons,
            k_cap: DEFAULT_K_CAP,
            band_cap: default_band_cap(group),
            dense_factor: DEFAULT_DENSE_FACTOR,
            ramp: RampShape::default(),
        }
    }

    pub fn group(&self) -> Group {
        self.f0.group()
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        let bad = |msg: String| Err(ConstructError::InvalidParams(msg));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.count > self.epsilons.len() {
            return bad(format!("count {} exceeds the {} epsilons given", self.count, self.epsilons.len()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("epsilons must be positive and finite, got {e}"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing".into());
        }
        if self.f0.support().is_empty() {
            return bad("f0 vanishes identically".into());
        }
        if self.k_cap == 0 || self.k_cap > 24 {
            return bad(format!("k_cap must be in 1..=24, got {}", self.k_cap));
        }
        if !within_cap(self.group(), 1, self.band_cap) {
            return bad(format!("band_cap {} is below the smallest search bandlimit", self.band_cap));
        }
        if self.dense_factor < 2 {
            return bad("dense_factor must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error("m = {m}: no level k <= {k_cap} meets the cutoff criterion (last sum {last_sum:e}, delta {delta:e})")]
    CutoffExhausted {
        m: usize,
        k_cap: u32,
        last_sum: f64,
        delta: f64,
    },
    #[error("m = {m}: {source}")]
    Approx {
        m: usize,
        #[source]
        source: ApproxError,
    },
}

impl ConstructError {
    /// Whether the failure is a cap being reached rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, ConstructError::CutoffExhausted { .. } | ConstructError::Approx { .. })
    }
}

/// A failed construction with whatever prefix of the system was completed.
#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct ConstructFailure {
    pub error: ConstructError,
    pub bundle: Option<Box<SystemBundle>>,
}

/// `min(eps / 3, 1 / sum_{pi in Lambda} d_pi^{5/2})`, clamped to at most 1;
/// the second term is absent for empty `Lambda`.
pub fn compute_delta_m<'a>(eps: f64, lambda: impl IntoIterator<Item = &'a IrrepLabel>) -> f64 {
    let sum: f64 = lambda.into_iter().map(|l| (l.degree() as f64).powf(2.5)).sum();
    let delta = if sum > 0.0 { (eps / 3.0).min(1.0 / sum) } else { eps / 3.0 };
    delta.min(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutoffError {
    #[error("no level k <= {k_cap} meets the cutoff criterion; last sum {last_sum:e}")]
    CapExhausted { k_cap: u32, last_sum: f64 },
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
}

/// A level `k` and its cutoff sum `sum_{Lambda} d_pi sum_ij |psi_k^(pi)_ij|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub k: u32,
    pub sum: f64,
}

/// Cutoff sum of `psi_k` over `lambda`.
pub fn cutoff_sum(
    lambda: &[IrrepLabel],
    k: u32,
    tree: &DyadicTree,
    f0: &SpectralCoeffs,
    ramp: RampShape,
) -> Result<f64, DyadicError> {
    Ok(entrywise_l1(&psi_coeffs(tree, k, f0, ramp, lambda)?))
}

/// Smallest `k <= k_cap` whose cutoff sum is strictly below `delta`.
pub fn find_cutoff_m(
    lambda: &[IrrepLabel],
    delta: f64,
    tree: &DyadicTree,
    f0: &SpectralCoeffs,
    ramp: RampShape,
    k_cap: u32,
) -> Result<Cutoff, CutoffError> {
    if lambda.is_empty() {
        return Ok(Cutoff { k: 1, sum: 0.0 });
    }
    let top = k_cap.min(tree.k_max());
    let mut last_sum = f64::INFINITY;
    for k in 1..=top {
        let sum = cutoff_sum(lambda, k, tree, f0, ramp)?;
        if sum < delta {
            return Ok(Cutoff { k, sum });
        }
        last_sum = sum;
    }
    Err(CutoffError::CapExhausted { k_cap: top, last_sum })
}

/// Runs the induction for `m = 1..=count`. On a cap error the completed
/// prefix is returned inside the failure, marked partial.
pub fn construct_system(params: &ConstructionParams) -> Result<SystemBundle, ConstructFailure> {
    let fail = |error: ConstructError| ConstructFailure { error, bundle: None };
    params.validate().map_err(fail)?;
    let f0 = params.f0.clone();
    let tree = DyadicTree::from_weight(&f0, params.k_cap).map_err(|e| fail(e.into()))?;
    let mut bundle = SystemBundle {
        f0: f0.clone(),
        epsilons: params.epsilons.clone(),
        params: BundleParams {
            k_cap: params.k_cap,
            band_cap: params.band_cap,
            dense_factor: params.dense_factor,
            ramp: params.ramp,
            count: params.count,
        },
        tree,
        records: Vec::new(),
        partial: false,
        failure: None,
    };
    let mut lambda: BTreeSet<IrrepLabel> = BTreeSet::new();
    for m in 1..=params.count {
        match build_record(params, &bundle.tree, m, &lambda) {
            Ok(record) => {
                lambda.extend(record.coeffs.support());
                bundle.records.push(record);
            }
            Err(error) => {
                bundle.partial = true;
                bundle.failure = Some(error.to_string());
                return Err(ConstructFailure {
                    error,
                    bundle: Some(Box::new(bundle)),
                });
            }
        }
    }
    Ok(bundle)
}

fn build_record(
    params: &ConstructionParams,
    tree: &DyadicTree,
    m: usize,
    lambda: &BTreeSet<IrrepLabel>,
) -> Result<SystemRecord, ConstructError> {
    let eps = params.epsilons[m - 1];
    let labels: Vec<IrrepLabel> = lambda.iter().cloned().collect();
    let (k, delta, target) = if m == 1 {
        (1, None, eps)
    } else {
        let delta = compute_delta_m(eps, &labels);
        let cutoff = find_cutoff_m(&labels, delta, tree, &params.f0, params.ramp, params.k_cap).map_err(|e| match e {
            CutoffError::CapExhausted { k_cap, last_sum } => ConstructError::CutoffExhausted {
                m,
                k_cap,
                last_sum,
                delta,
            },
            CutoffError::Dyadic(d) => d.into(),
        })?;
        (cutoff.k, Some(delta), delta * delta)
    };
    let psi = WindowedFunction::psi(tree, k, &params.f0, params.ramp)?;
    let approx = approximate_uniformly(&psi, target, params.band_cap, params.dense_factor)
        .map_err(|source| ConstructError::Approx { m, source })?;
    let f = zero_on_set(&approx.coeffs, lambda);
    let grid = dense_grid(
        params.group(),
        approx.bandlimit as f64,
        psi.side_band(),
        params.dense_factor,
        &psi.beta_breaks(),
    );
    let sup_err = sup_distance(&f, &psi, &grid);
    let cores = shrink_cores(tree, k)?;
    Ok(SystemRecord {
        m,
        k_m: k,
        delta_m: delta,
        lambda: labels,
        coeffs: f,
        omega: cores.intervals.clone(),
        polar_cap: cores.polar_cap.map(|c| c.fraction),
        omega_measure: cores.measure(),
        sup_err,
        bandlimit: approx.bandlimit,
        taper: approx.taper,
    })
}
