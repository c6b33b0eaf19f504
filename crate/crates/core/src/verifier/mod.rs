//! Independent certification of a persisted [`SystemBundle`].
//!
//! Every check works from the bundle contents alone: supports and the
//! recomputed coefficients on `Lambda_m`, the upper bound
//! `|f_m| < |f_0| + eps_m` on a dense grid plus random points, the lower
//! bound `|f_m| > |f_0| - eps_m` on `Omega_m`, the measure of `Omega_m`, and
//! the chain `sup |f_m - psi_{k_m}| < delta_m^2 + 2 delta_m <= eps_m`.

mod corrupt;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructor::{compute_delta_m, dense_grid, sup_distance, SystemBundle, SystemRecord, BUNDLE_VERSION};
use crate::dyadic::{shrink_cores, Cores, DyadicError};
use crate::group::{haar_grid, Group, GroupPoint, IrrepLabel, QuadratureGrid};
use crate::spectral::{analyze_labels, synthesize, synthesize_grid, GridFunction, GroupFunction, SpectralCoeffs};

pub use corrupt::{inflate_omega, inject_support, scale_record};

/// Margins above `-MARGIN_TOL` pass.
pub const MARGIN_TOL: f64 = 1e-9;
/// Recomputed coefficients on `Lambda_m` must stay below this on abelian groups.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL_SU2: f64 = 1e-9;
/// Tolerance for stored and recomputed core intervals and measures.
pub const OMEGA_TOL: f64 = 1e-12;
pub const DEFAULT_RANDOM_POINTS: usize = 10_000;
pub const DEFAULT_GRID_FACTOR: usize = 8;

pub fn residual_tolerance(group: Group) -> f64 {
    match group {
        Group::Su2 => RESIDUAL_TOL_SU2,
        _ => RESIDUAL_TOL,
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub grid_factor: usize,
    pub random_points: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid_factor: DEFAULT_GRID_FACTOR,
            random_points: DEFAULT_RANDOM_POINTS,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointCheck {
    /// Stored supports pairwise disjoint and `Lambda_m` equal to the union
    /// of the earlier supports.
    pub disjoint: bool,
    /// `max |f_m^(pi)_ij|` over `pi in Lambda_m`, recomputed by quadrature.
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Minimum margin over the checked points.
    pub margin: f64,
    pub points: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaCheck {
    pub measure: f64,
    pub recomputed: f64,
    /// `1 - 2^{-k_m}`.
    pub bound: f64,
    pub max_interval_error: f64,
    pub max_cell_deficit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub delta_sq: Option<f64>,
    pub two_delta: Option<f64>,
    pub sup_err: f64,
    pub eps: f64,
    /// `delta_m` recomputed from `eps_m` and `Lambda_m`.
    pub delta_expected: Option<f64>,
    /// `sup |f_m - psi_{k_m}|` on the verifier's own points; reported only.
    pub sup_recomputed: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordReport {
    pub m: usize,
    pub k_m: u32,
    pub disjoint: DisjointCheck,
    pub upper: BoundCheck,
    /// Analytic cross-check `eps_m - sup_err` for the upper margin.
    pub upper_analytic: f64,
    pub lower: BoundCheck,
    pub omega: OmegaCheck,
    pub chain: ChainCheck,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub grid_factor: usize,
    pub sweep_nodes: Vec<usize>,
    pub total_nodes: Vec<usize>,
    pub random_points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub group: String,
    pub passed: bool,
    pub partial: bool,
    /// Names like `m=2:upper`; empty iff `passed`.
    pub failed_checks: Vec<String>,
    /// The lower bounds `1 - 2^{-k_m}` never decrease along the run.
    pub omega_bounds_monotone: bool,
    pub records: Vec<RecordReport>,
    pub grid: GridMeta,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Stored-support disjointness and the recomputed residual for record `i`.
pub fn verify_disjoint(bundle: &SystemBundle, i: usize) -> DisjointCheck {
    let r = &bundle.records[i];
    let earlier: BTreeSet<IrrepLabel> = bundle.records[..i]
        .iter()
        .flat_map(|p| p.coeffs.labels().cloned())
        .collect();
    let own: BTreeSet<IrrepLabel> = r.coeffs.labels().cloned().collect();
    let stored_lambda: BTreeSet<IrrepLabel> = r.lambda.iter().cloned().collect();
    let disjoint = own.is_disjoint(&earlier) && own.is_disjoint(&stored_lambda) && stored_lambda == earlier;
    let residual = lambda_residual(&r.coeffs, &r.lambda);
    DisjointCheck {
        disjoint,
        residual,
        passed: disjoint && residual < residual_tolerance(bundle.group()),
    }
}

/// `max |f^(pi)_ij|` over `pi in lambda`, computed by exact quadrature of
/// the synthesized function.
pub fn lambda_residual(f: &SpectralCoeffs, lambda: &[IrrepLabel]) -> f64 {
    if lambda.is_empty() {
        return 0.0;
    }
    let group = f.group();
    let band2 = lambda.iter().map(|l| l.band2()).max().unwrap_or(0).max(f.band2());
    let b = band2.div_ceil(2) as usize;
    let grid = match group {
        Group::Su2 => haar_grid(group, b as u32),
        _ => QuadratureGrid::uniform(group, (2 * b + 2).next_power_of_two()),
    };
    let mut acc = SpectralCoeffs::new(group);
    for chunk in grid.chunks() {
        let values = GridFunction::new(&chunk, synthesize_grid(f, &chunk)).expect("grid sized");
        acc = acc.add(&analyze_labels(&values, &chunk, lambda).expect("labels belong to the group"));
    }
    acc.max_entry()
}

/// Grid on which the bounds for record `r` are checked.
pub fn verification_grid(bundle: &SystemBundle, r: &SystemRecord, factor: usize) -> QuadratureGrid {
    let cores = r.cores(&bundle.tree);
    let breaks = match cores.polar_cap {
        Some(cap) if cap.angle > 0.0 && cap.angle < std::f64::consts::FRAC_PI_2 => {
            vec![0.0, cap.angle, std::f64::consts::PI - cap.angle, std::f64::consts::PI]
        }
        _ => vec![0.0, std::f64::consts::PI],
    };
    dense_grid(
        bundle.group(),
        r.coeffs.bandlimit(),
        bundle.f0.bandlimit(),
        factor,
        &breaks,
    )
}

fn random_points(group: Group, n: usize, seed: u64) -> Vec<GroupPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| group.random_point(&mut rng)).collect()
}

struct Margins {
    upper: f64,
    lower: f64,
    lower_points: usize,
}

impl Margins {
    fn empty() -> Self {
        Margins {
            upper: f64::INFINITY,
            lower: f64::INFINITY,
            lower_points: 0,
        }
    }

    fn merge(self, o: Margins) -> Margins {
        Margins {
            upper: self.upper.min(o.upper),
            lower: self.lower.min(o.lower),
            lower_points: self.lower_points + o.lower_points,
        }
    }

    fn push(&mut self, f: f64, f0: f64, eps: f64, inside: bool) {
        self.upper = self.upper.min(f0 + eps - f);
        if inside {
            self.lower = self.lower.min(f - f0 + eps);
            self.lower_points += 1;
        }
    }
}

fn margins(bundle: &SystemBundle, r: &SystemRecord, eps: f64, grid: &QuadratureGrid, extra: &[GroupPoint]) -> Margins {
    let cores = r.cores(&bundle.tree);
    let on_grid = grid
        .chunks()
        .into_par_iter()
        .map(|chunk| {
            let f = synthesize_grid(&r.coeffs, &chunk);
            let f0 = synthesize_grid(&bundle.f0, &chunk);
            let mut m = Margins::empty();
            for (i, (a, b)) in f.iter().zip(&f0).enumerate() {
                m.push(a.norm(), b.norm(), eps, cores.contains(&chunk.point(i)));
            }
            m
        })
        .reduce(Margins::empty, Margins::merge);
    let off_grid = extra
        .par_iter()
        .map(|g| {
            let mut m = Margins::empty();
            m.push(synthesize(&r.coeffs, g).norm(), synthesize(&bundle.f0, g).norm(), eps, cores.contains(g));
            m
        })
        .reduce(Margins::empty, Margins::merge);
    on_grid.merge(off_grid)
}

/// Upper and lower margins for record `i`.
pub fn verify_bounds(bundle: &SystemBundle, i: usize, opts: &VerifyOptions) -> (BoundCheck, BoundCheck) {
    let r = &bundle.records[i];
    let eps = bundle.epsilons[r.m - 1];
    let grid = verification_grid(bundle, r, opts.grid_factor);
    let extra = random_points(bundle.group(), opts.random_points, opts.seed);
    let m = margins(bundle, r, eps, &grid, &extra);
    let total = grid.len() + extra.len();
    (
        BoundCheck {
            margin: m.upper,
            points: total,
            passed: m.upper > -MARGIN_TOL,
        },
        BoundCheck {
            margin: m.lower,
            points: m.lower_points,
            passed: m.lower_points > 0 && m.lower > -MARGIN_TOL,
        },
    )
}

/// Upper margin `min (|f_0| + eps_m - |f_m|)` for record `i`.
pub fn verify_upper(bundle: &SystemBundle, i: usize, opts: &VerifyOptions) -> BoundCheck {
    verify_bounds(bundle, i, opts).0
}

/// Lower margin `min (|f_m| - |f_0| + eps_m)` over points of `Omega_m`.
pub fn verify_lower(bundle: &SystemBundle, i: usize, opts: &VerifyOptions) -> BoundCheck {
    verify_bounds(bundle, i, opts).1
}

/// Stored cores against the shrink rule applied to the stored tree.
pub fn verify_omega(bundle: &SystemBundle, i: usize) -> Result<OmegaCheck, VerifyError> {
    let r = &bundle.records[i];
    let fresh = shrink_cores(&bundle.tree, r.k_m)?;
    let stored: Cores = r.cores(&bundle.tree);
    let bound = 1.0 - 2f64.powi(-(r.k_m as i32));
    if stored.intervals.len() != fresh.intervals.len() {
        return Ok(OmegaCheck {
            measure: r.omega_measure,
            recomputed: fresh.measure(),
            bound,
            max_interval_error: f64::INFINITY,
            max_cell_deficit: f64::INFINITY,
            passed: false,
        });
    }
    let mut err = 0.0f64;
    let mut contained = true;
    for ((s, f), c) in stored.intervals.iter().zip(&fresh.intervals).zip(&stored.cells) {
        err = err.max((s.0 - f.0).abs()).max((s.1 - f.1).abs());
        contained &= c.0 <= s.0 && s.0 <= s.1 && s.1 <= c.1;
    }
    let cap_matches = match (r.polar_cap, fresh.polar_cap) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b.fraction).abs() <= OMEGA_TOL,
        _ => false,
    };
    let per_cell = 2f64.powi(-2 * r.k_m as i32);
    let max_deficit = (0..stored.cells.len()).map(|j| stored.deficit(j)).fold(0.0, f64::max);
    let measure = stored.measure();
    let recomputed = fresh.measure();
    let passed = contained
        && cap_matches
        && err <= OMEGA_TOL
        && (measure - r.omega_measure).abs() <= OMEGA_TOL
        && (recomputed - r.omega_measure).abs() <= OMEGA_TOL
        && max_deficit < per_cell
        && measure >= bound;
    Ok(OmegaCheck {
        measure: r.omega_measure,
        recomputed,
        bound,
        max_interval_error: err,
        max_cell_deficit: max_deficit,
        passed,
    })
}

/// The chain inequalities for record `i`, gated on the recorded sup error.
pub fn verify_chain(bundle: &SystemBundle, i: usize, opts: &VerifyOptions) -> Result<ChainCheck, VerifyError> {
    let r = &bundle.records[i];
    let eps = bundle.epsilons[r.m - 1];
    let psi = bundle.psi(i)?;
    let grid = verification_grid(bundle, r, opts.grid_factor);
    let extra = random_points(bundle.group(), opts.random_points.min(2000), opts.seed ^ 0x5eed);
    let off_grid = extra
        .par_iter()
        .map(|g| (synthesize(&r.coeffs, g) - psi.eval(g)).norm())
        .reduce(|| 0.0, f64::max);
    let sup_recomputed = sup_distance(&r.coeffs, &psi, &grid).max(off_grid);
    let expected = (r.m > 1).then(|| compute_delta_m(eps, &r.lambda));
    let (delta_sq, two_delta, passed) = match r.delta_m {
        None => (None, None, r.m == 1 && r.sup_err < eps),
        Some(d) => {
            let d2 = d * d;
            let ok = r.m > 1
                && expected.is_some_and(|e| (e - d).abs() <= 1e-12 * e.max(1.0))
                && r.sup_err < d2 + 2.0 * d
                && d2 + 2.0 * d <= eps;
            (Some(d2), Some(2.0 * d), ok)
        }
    };
    Ok(ChainCheck {
        delta_sq,
        two_delta,
        sup_err: r.sup_err,
        eps,
        delta_expected: expected,
        sup_recomputed,
        passed: passed && r.sup_err.is_finite(),
    })
}

fn check_shape(bundle: &SystemBundle) -> Result<(), VerifyError> {
    let bad = |s: String| Err(VerifyError::Malformed(s));
    for (i, r) in bundle.records.iter().enumerate() {
        if r.m != i + 1 {
            return bad(format!("record {i} has m = {}", r.m));
        }
        if r.m > bundle.epsilons.len() {
            return bad(format!("no epsilon for m = {}", r.m));
        }
        if r.k_m == 0 || r.k_m > bundle.tree.k_max() {
            return bad(format!("m = {}: k_m = {} outside the stored tree", r.m, r.k_m));
        }
        if r.coeffs.group() != bundle.group() {
            return bad(format!("m = {}: coefficients of another group", r.m));
        }
    }
    Ok(())
}

/// Runs every check on every record.
pub fn verify_bundle(bundle: &SystemBundle, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    check_shape(bundle)?;
    let mut records = Vec::with_capacity(bundle.records.len());
    let mut failed = Vec::new();
    let mut meta = GridMeta {
        grid_factor: opts.grid_factor,
        sweep_nodes: Vec::new(),
        total_nodes: Vec::new(),
        random_points: opts.random_points,
        seed: opts.seed,
    };
    for (i, r) in bundle.records.iter().enumerate() {
        let grid = verification_grid(bundle, r, opts.grid_factor);
        meta.sweep_nodes.push(grid.sweep_nodes());
        meta.total_nodes.push(grid.len());
        let disjoint = verify_disjoint(bundle, i);
        let (upper, lower) = verify_bounds(bundle, i, opts);
        let omega = verify_omega(bundle, i)?;
        let chain = verify_chain(bundle, i, opts)?;
        let eps = bundle.epsilons[r.m - 1];
        for (name, ok) in [
            ("disjoint", disjoint.passed),
            ("upper", upper.passed),
            ("lower", lower.passed),
            ("omega", omega.passed),
            ("chain", chain.passed),
        ] {
            if !ok {
                failed.push(format!("m={}:{name}", r.m));
            }
        }
        let passed = disjoint.passed && upper.passed && lower.passed && omega.passed && chain.passed;
        records.push(RecordReport {
            m: r.m,
            k_m: r.k_m,
            disjoint,
            upper,
            upper_analytic: eps - r.sup_err,
            lower,
            omega,
            chain,
            passed,
        });
    }
    let monotone = bundle.records.windows(2).all(|w| w[1].k_m >= w[0].k_m);
    if !monotone {
        failed.push("omega_monotone".to_string());
    }
    Ok(VerificationReport {
        version: BUNDLE_VERSION,
        group: bundle.group().to_string(),
        passed: failed.is_empty(),
        partial: bundle.partial,
        failed_checks: failed,
        omega_bounds_monotone: monotone,
        records,
        grid: meta,
    })
}
