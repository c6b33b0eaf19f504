use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{enumerate_irreps, Group, QuadratureGrid};
use crate::spectral::{analyze_streaming, synthesize_grid, GroupFunction, SpectralCoeffs};

/// Minimum number of sweep nodes in a dense circle or torus grid.
pub const MIN_DENSE_SWEEP: usize = 8192;
/// Minimum number of sweep nodes in a dense SU(2) grid.
pub const MIN_DENSE_SWEEP_SU2: usize = 1024;
const MAX_DENSE_NODES: usize = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    /// Multiplier `1 - bandlimit(pi) / (B + 1)`.
    Fejer,
    /// Plain truncation.
    None,
}

impl fmt::Display for Taper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Taper::Fejer => "fejer",
            Taper::None => "none",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("bandlimit cap {band_cap} reached; best sup error {best_sup:e} at bandlimit {bandlimit} (target {target:e})")]
    CapReached {
        band_cap: u32,
        bandlimit: u32,
        best_sup: f64,
        target: f64,
    },
    #[error("target sup error must be positive, got {0}")]
    BadTarget(f64),
}

/// A trigonometric polynomial within `sup_err` of the target on the dense grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub coeffs: SpectralCoeffs,
    /// Search bandlimit `B` in label units (`|n|` or `j`).
    pub bandlimit: u32,
    pub sup_err: f64,
    pub taper: Taper,
}

/// Whether the search bandlimit `l` is allowed by `band_cap`; on SU(2) the
/// cap is in units of `2j`.
pub fn within_cap(group: Group, l: u32, band_cap: u32) -> bool {
    match group {
        Group::Su2 => 2 * l as u64 <= band_cap as u64,
        _ => l <= band_cap,
    }
}

/// Grid on which sup norms are taken: about `factor` nodes per shortest
/// wavelength at bandlimit `band` along every axis, at least
/// [`MIN_DENSE_SWEEP`] along the sweep axis, and `beta` pieces split at
/// `breaks` on SU(2).
pub fn dense_grid(group: Group, band: f64, side_band: f64, factor: usize, breaks: &[f64]) -> QuadratureGrid {
    let b = band.max(1.0).ceil() as usize;
    let side = band.max(side_band).max(1.0).ceil() as usize;
    match group {
        Group::Circle => QuadratureGrid::uniform(group, (2 * factor * b).next_power_of_two().max(MIN_DENSE_SWEEP)),
        Group::Torus(d) => {
            let sweep = (2 * factor * b).next_power_of_two().max(MIN_DENSE_SWEEP);
            let mut other = (2 * factor * side).next_power_of_two().max(8);
            while other > 2 * side + 2 && sweep * other.pow(d as u32 - 1) > MAX_DENSE_NODES {
                other /= 2;
            }
            let mut sizes = vec![other; d];
            sizes[0] = sweep;
            QuadratureGrid::uniform_sizes(group, sizes)
        }
        Group::Su2 => {
            let n_alpha = (2 * factor * b).next_power_of_two().max(MIN_DENSE_SWEEP_SU2);
            let n_gamma = (2 * factor * side).next_power_of_two().max(8);
            let pieces = breaks.len().saturating_sub(1).max(1);
            let nodes = (factor * (side + 1)).div_ceil(pieces) + 4;
            QuadratureGrid::su2_pieces(n_alpha, n_gamma, breaks, nodes)
        }
    }
}

/// Grid for analysing a function that is not bandlimited, up to bandlimit `l`.
fn analysis_grid(group: Group, l: usize, side: usize, breaks: &[f64]) -> QuadratureGrid {
    let sweep = (16 * l).next_power_of_two().max(1024);
    let other = (2 * (l + side) + 2).next_power_of_two().max(8);
    match group {
        Group::Circle => QuadratureGrid::uniform(group, sweep),
        Group::Torus(d) => {
            let mut sizes = vec![other; d];
            sizes[0] = sweep;
            QuadratureGrid::uniform_sizes(group, sizes)
        }
        Group::Su2 => QuadratureGrid::su2_pieces(sweep.min(1 << 14), 2 * other, breaks, 2 * l + 48),
    }
}

/// `max |synthesis of a - f|` over the nodes of `grid`.
pub fn sup_distance<F: GroupFunction + ?Sized>(a: &SpectralCoeffs, f: &F, grid: &QuadratureGrid) -> f64 {
    grid.chunks()
        .into_par_iter()
        .map(|chunk| {
            let s = synthesize_grid(a, &chunk);
            let v = f.sample(&chunk);
            s.iter().zip(&v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Fourier coefficients of `f` up to bandlimit `l`, exact when `f` knows them.
pub fn coefficients_up_to<F: GroupFunction + ?Sized>(f: &F, l: u32) -> SpectralCoeffs {
    let labels = enumerate_irreps(f.group(), l);
    if let Some(c) = f.exact_coeffs(&labels) {
        return c;
    }
    let grid = analysis_grid(f.group(), l as usize, f.side_band().ceil() as usize, &f.beta_breaks());
    analyze_streaming(f, &grid, &labels).expect("labels belong to the grid's group")
}

/// Doubles the bandlimit `B = 1, 2, 4, ...` until the Fejér-tapered (or
/// else the plainly truncated) Fourier series of `f` is within `target` of
/// `f` on the dense grid.
pub fn approximate_uniformly<F: GroupFunction + ?Sized>(
    f: &F,
    target: f64,
    band_cap: u32,
    dense_factor: usize,
) -> Result<Approximation, ApproxError> {
    if !(target > 0.0) {
        return Err(ApproxError::BadTarget(target));
    }
    let group = f.group();
    let mut best = f64::INFINITY;
    let mut l = 1u32;
    let mut last = 0;
    while within_cap(group, l, band_cap) {
        last = l;
        let raw = coefficients_up_to(f, l);
        let scale = (l + 1) as f64;
        let fejer = raw.map(|label, m| m * Complex64::new(1.0 - label.bandlimit() / scale, 0.0));
        let grid = dense_grid(group, l as f64, f.side_band(), dense_factor, &f.beta_breaks());
        for (taper, c) in [(Taper::Fejer, fejer), (Taper::None, raw)] {
            let c = c.restrict(&c.support());
            let sup = sup_distance(&c, f, &grid);
            if sup < target {
                return Ok(Approximation {
                    coeffs: c,
                    bandlimit: l,
                    sup_err: sup,
                    taper,
                });
            }
            best = best.min(sup);
        }
        l *= 2;
    }
    Err(ApproxError::CapReached {
        band_cap,
        bandlimit: last,
        best_sup: best,
        target,
    })
}
