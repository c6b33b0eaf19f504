//! The Rademacher-like system `delta_k = f0 * sum_j (-1)^{j+1} 1_{D_j^k}` and
//! its continuous companion `psi_k`, where each indicator is replaced by an
//! Urysohn function `gamma_j^k` rising from 0 on the cell boundary to 1 on
//! the core.
//!
//! On SU(2) the sweep coordinate is discontinuous at the poles `beta = 0, pi`,
//! so `gamma_j^k` is additionally multiplied by a polar cap profile that
//! vanishes there.

mod ramp;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dyadic::{shrink_cores, weight_grid, Cores, DyadicError, DyadicTree, PolarCap};
use crate::group::{sweep_coordinate, Group, GroupPoint, IrrepLabel, QuadratureGrid, TAU};
use crate::spectral::{
    analyze_labels, synthesize, synthesize_grid, GridFunction, GroupFunction, MarginalSeries, SpectralCoeffs,
};

use ramp::{ramp_transform, Piece};

/// Profile of the Urysohn ramps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    /// Piecewise linear trapezoid.
    Linear,
    /// `e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})`, infinitely flat at both ends.
    #[default]
    Smooth,
}

impl RampShape {
    /// The rising profile on `[0, 1]`, clamped outside.
    pub fn profile(self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            RampShape::Linear => u,
            RampShape::Smooth => 1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp()),
        }
    }

    pub fn derivative(self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return match self {
                RampShape::Linear if u == 0.0 || u == 1.0 => 1.0,
                _ => 0.0,
            };
        }
        match self {
            RampShape::Linear => 1.0,
            RampShape::Smooth => {
                let h = self.profile(u);
                h * (1.0 - h) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)))
            }
        }
    }
}

impl fmt::Display for RampShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RampShape::Linear => "linear",
            RampShape::Smooth => "smooth",
        })
    }
}

impl FromStr for RampShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(RampShape::Linear),
            "smooth" => Ok(RampShape::Smooth),
            other => Err(format!("unknown ramp shape {other:?}; expected linear or smooth")),
        }
    }
}

/// Which of the two windows of a level to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// `sum_j (-1)^{j+1} 1_{D_j}`.
    Hard,
    /// `sum_j (-1)^{j+1} gamma_j` times the polar cap.
    Ramped,
}

/// Cells, cores and signs of one level, with both evaluation modes.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowEnvelope {
    level: u32,
    cells: Vec<(f64, f64)>,
    cores: Vec<(f64, f64)>,
    polar_cap: Option<PolarCap>,
    ramp: RampShape,
}

impl WindowEnvelope {
    pub fn new(tree: &DyadicTree, k: u32, ramp: RampShape) -> Result<Self, DyadicError> {
        Ok(Self::from_cores(&shrink_cores(tree, k)?, ramp))
    }

    pub fn from_cores(cores: &Cores, ramp: RampShape) -> Self {
        WindowEnvelope {
            level: cores.level,
            cells: cores.cells.clone(),
            cores: cores.intervals.clone(),
            polar_cap: cores.polar_cap,
            ramp,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells(&self) -> &[(f64, f64)] {
        &self.cells
    }

    pub fn cores(&self) -> &[(f64, f64)] {
        &self.cores
    }

    pub fn polar_cap(&self) -> Option<PolarCap> {
        self.polar_cap
    }

    pub fn ramp(&self) -> RampShape {
        self.ramp
    }

    /// `(-1)^{j+1}` for the one-based cell index `j`.
    pub fn sign(j: usize) -> f64 {
        if j % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn cell_index(&self, t: f64) -> usize {
        self.cells.partition_point(|&(a, _)| a <= t).clamp(1, self.cells.len()) - 1
    }

    pub fn hard(&self, t: f64) -> f64 {
        Self::sign(self.cell_index(t))
    }

    /// Unsigned Urysohn value `gamma_j(t)` in the cell containing `t`.
    pub fn gamma(&self, t: f64) -> f64 {
        let j = self.cell_index(t);
        let (a, b) = self.cells[j];
        let (c, d) = self.cores[j];
        if t < c {
            self.ramp.profile((t - a) / (c - a))
        } else if t > d {
            self.ramp.profile((b - t) / (b - d))
        } else {
            1.0
        }
    }

    pub fn ramped(&self, t: f64) -> f64 {
        Self::sign(self.cell_index(t)) * self.gamma(t)
    }

    /// Polar cap profile; identically 1 off SU(2).
    pub fn cap(&self, beta: f64) -> f64 {
        match self.polar_cap {
            None => 1.0,
            Some(cap) => {
                let edge = beta.min(std::f64::consts::PI - beta);
                if edge >= cap.angle {
                    1.0
                } else {
                    self.ramp.profile(edge / cap.angle)
                }
            }
        }
    }

    /// The window value at a group element.
    pub fn at(&self, mode: Window, g: &GroupPoint) -> f64 {
        let t = sweep_coordinate(g);
        match (mode, g) {
            (Window::Hard, _) => self.hard(t),
            (Window::Ramped, GroupPoint::Su2(e)) => self.ramped(t) * self.cap(e.beta),
            (Window::Ramped, _) => self.ramped(t),
        }
    }

    pub fn beta_breaks(&self, mode: Window) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        match (mode, self.polar_cap) {
            (Window::Ramped, Some(cap)) if cap.angle < pi / 2.0 => vec![0.0, cap.angle, pi - cap.angle, pi],
            _ => vec![0.0, pi],
        }
    }

    /// Fourier coefficients `W^(l) = integral_0^1 W(t) e^{-2 pi i l t} dt`
    /// of the sweep part of the window, for `|l| <= l_max`, stored at index
    /// `l + l_max`.
    pub fn series(&self, mode: Window, l_max: usize) -> Vec<Complex64> {
        match mode {
            Window::Hard => self.hard_series(l_max),
            Window::Ramped => self.profile_series(l_max, Piece::Ramp, true, 1.0),
        }
    }

    fn hard_series(&self, l_max: usize) -> Vec<Complex64> {
        let cells = &self.cells;
        let l = l_max as i64;
        (-l..=l)
            .into_par_iter()
            .map(|n| {
                cells
                    .iter()
                    .enumerate()
                    .map(|(j, &(a, b))| Self::sign(j) * interval_transform(n, a, b))
                    .sum()
            })
            .collect()
    }

    /// Series of the window equal to `p(v)` on each ramp (rising toward the
    /// core), `core` on each core and optionally signed per cell.
    pub(crate) fn profile_series(&self, l_max: usize, piece: Piece, signed: bool, core: f64) -> Vec<Complex64> {
        let mut widths: Vec<f64> = Vec::new();
        for (&(a, b), &(c, d)) in self.cells.iter().zip(&self.cores) {
            widths.push(c - a);
            widths.push(b - d);
        }
        widths.sort_by(f64::total_cmp);
        widths.dedup();
        let shape = self.ramp;
        let table: HashMap<u64, Vec<Complex64>> = widths
            .iter()
            .map(|&s| {
                let r: Vec<Complex64> = (0..=l_max)
                    .into_par_iter()
                    .map(|n| ramp_transform(shape, piece, n as f64 * s))
                    .collect();
                (s.to_bits(), r)
            })
            .collect();
        let r_at = |s: f64, n: i64| -> Complex64 {
            let r = table[&s.to_bits()][n.unsigned_abs() as usize];
            if n < 0 {
                r.conj()
            } else {
                r
            }
        };
        let l = l_max as i64;
        (-l..=l)
            .into_par_iter()
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, (&(a, b), &(c, d))) in self.cells.iter().zip(&self.cores).enumerate() {
                    let (sl, sr) = (c - a, b - d);
                    let w = -TAU * n as f64;
                    let left = Complex64::cis(w * a) * r_at(sl, n) * sl;
                    let right = Complex64::cis(w * b) * r_at(sr, n).conj() * sr;
                    let mut cell = left + right;
                    if core != 0.0 {
                        cell += interval_transform(n, c, d) * core;
                    }
                    acc += if signed { cell * Self::sign(j) } else { cell };
                }
                acc
            })
            .collect()
    }
}

/// `integral_a^b e^{-2 pi i n t} dt`.
fn interval_transform(n: i64, a: f64, b: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(b - a, 0.0);
    }
    let w = TAU * n as f64;
    (Complex64::cis(-w * a) - Complex64::cis(-w * b)) / Complex64::new(0.0, w)
}

/// `f0 * W` as an evaluable function.
#[derive(Clone, Debug)]
pub struct WindowedFunction {
    f0: SpectralCoeffs,
    env: WindowEnvelope,
    mode: Window,
}

/// `psi_k`.
pub type PsiFunction = WindowedFunction;
/// `delta_k`.
pub type DeltaFunction = WindowedFunction;

impl WindowedFunction {
    pub fn psi(tree: &DyadicTree, k: u32, f0: &SpectralCoeffs, ramp: RampShape) -> Result<Self, DyadicError> {
        Ok(WindowedFunction {
            f0: f0.clone(),
            env: WindowEnvelope::new(tree, k, ramp)?,
            mode: Window::Ramped,
        })
    }

    pub fn delta(tree: &DyadicTree, k: u32, f0: &SpectralCoeffs) -> Result<Self, DyadicError> {
        Ok(WindowedFunction {
            f0: f0.clone(),
            env: WindowEnvelope::new(tree, k, RampShape::default())?,
            mode: Window::Hard,
        })
    }

    pub fn from_parts(f0: &SpectralCoeffs, env: WindowEnvelope, mode: Window) -> Self {
        WindowedFunction {
            f0: f0.clone(),
            env,
            mode,
        }
    }

    pub fn envelope(&self) -> &WindowEnvelope {
        &self.env
    }

    pub fn mode(&self) -> Window {
        self.mode
    }

    pub fn f0(&self) -> &SpectralCoeffs {
        &self.f0
    }

    /// Exact Fourier coefficients at `labels`.
    pub fn coeffs(&self, labels: &[IrrepLabel]) -> SpectralCoeffs {
        windowed_coeffs(&self.f0, &self.env, self.mode, labels)
    }
}

impl GroupFunction for WindowedFunction {
    fn group(&self) -> Group {
        self.f0.group()
    }

    fn eval(&self, g: &GroupPoint) -> Complex64 {
        synthesize(&self.f0, g) * self.env.at(self.mode, g)
    }

    fn sample(&self, grid: &QuadratureGrid) -> Vec<Complex64> {
        let mut v = synthesize_grid(&self.f0, grid);
        v.par_iter_mut()
            .enumerate()
            .for_each(|(i, z)| *z *= self.env.at(self.mode, &grid.point(i)));
        v
    }

    fn beta_breaks(&self) -> Vec<f64> {
        self.env.beta_breaks(self.mode)
    }

    fn side_band(&self) -> f64 {
        self.f0.bandlimit()
    }

    fn exact_coeffs(&self, labels: &[IrrepLabel]) -> Option<SpectralCoeffs> {
        Some(self.coeffs(labels))
    }
}

/// `delta_k(g)`.
pub fn eval_delta(tree: &DyadicTree, k: u32, f0: &SpectralCoeffs, g: &GroupPoint) -> Result<Complex64, DyadicError> {
    Ok(WindowedFunction::delta(tree, k, f0)?.eval(g))
}

/// `psi_k(g)`.
pub fn eval_psi(
    tree: &DyadicTree,
    k: u32,
    f0: &SpectralCoeffs,
    ramp: RampShape,
    g: &GroupPoint,
) -> Result<Complex64, DyadicError> {
    Ok(WindowedFunction::psi(tree, k, f0, ramp)?.eval(g))
}

fn split_label(l: &IrrepLabel) -> (i64, &[i64]) {
    match l {
        IrrepLabel::Circle(n) => (*n, &[]),
        IrrepLabel::Torus(v) => (v[0], &v[1..]),
        IrrepLabel::Su2 { .. } => unreachable!("abelian labels only"),
    }
}

/// Fourier coefficients of `f0 * W` at `labels`.
///
/// On abelian groups this is the convolution of `f0^` with the window series
/// along the sweep axis. On SU(2) the window is replaced by its truncation to
/// the sweep frequencies that can reach `labels`, which leaves those
/// coefficients unchanged, and the product is analysed on a grid split at the
/// polar cap angle.
pub fn windowed_coeffs(f0: &SpectralCoeffs, env: &WindowEnvelope, mode: Window, labels: &[IrrepLabel]) -> SpectralCoeffs {
    let group = f0.group();
    let mut out = SpectralCoeffs::new(group);
    if labels.is_empty() {
        return out;
    }
    let band_f = f0.bandlimit().ceil() as usize;
    let band_l = labels.iter().map(|l| l.bandlimit()).fold(0.0, f64::max).ceil() as usize;
    let l_max = band_f + band_l;
    let series = env.series(mode, l_max);
    if group.is_abelian() {
        for label in labels {
            let (n0, rest) = split_label(label);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, a) in f0.iter() {
                let (m0, mrest) = split_label(m);
                let l = n0 - m0;
                if rest == mrest && l.unsigned_abs() as usize <= l_max {
                    acc += a[(0, 0)] * series[(l + l_max as i64) as usize];
                }
            }
            out.insert(label.clone(), nalgebra::DMatrix::from_element(1, 1, acc))
                .expect("label belongs to the group");
        }
        return out;
    }
    let n_alpha = (2 * l_max + 1).next_power_of_two().max(8);
    let grid = QuadratureGrid::su2_pieces(n_alpha, 2 * n_alpha, &env.beta_breaks(mode), 2 * l_max + 32);
    let w_alpha = series_on_nodes(&series, l_max, n_alpha);
    let mut vals = synthesize_grid(f0, &grid);
    vals.par_iter_mut().enumerate().for_each(|(i, z)| {
        let a = grid.sweep_index(i);
        let cap = match (mode, grid.point(i)) {
            (Window::Ramped, GroupPoint::Su2(e)) => env.cap(e.beta),
            _ => 1.0,
        };
        *z *= w_alpha[a] * cap;
    });
    let f = GridFunction::new(&grid, vals).expect("sample count matches grid");
    analyze_labels(&f, &grid, labels).expect("labels belong to SU(2)")
}

/// `sum_{|l| <= l_max} c_l e^{2 pi i l a / n}` at `a = 0..n`.
fn series_on_nodes(series: &[Complex64], l_max: usize, n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, c) in series.iter().enumerate() {
        let l = i as i64 - l_max as i64;
        buf[l.rem_euclid(n as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `psi_k^` at `labels`.
pub fn psi_coeffs(
    tree: &DyadicTree,
    k: u32,
    f0: &SpectralCoeffs,
    ramp: RampShape,
    labels: &[IrrepLabel],
) -> Result<SpectralCoeffs, DyadicError> {
    Ok(WindowedFunction::psi(tree, k, f0, ramp)?.coeffs(labels))
}

/// `delta_k^` at `labels`.
pub fn delta_coeffs(
    tree: &DyadicTree,
    k: u32,
    f0: &SpectralCoeffs,
    labels: &[IrrepLabel],
) -> Result<SpectralCoeffs, DyadicError> {
    Ok(WindowedFunction::delta(tree, k, f0)?.coeffs(labels))
}

/// `<delta_k, delta_l>` in `L2(G)`, from the exact CDF of `|f0|^2`.
pub fn delta_inner(tree: &DyadicTree, k: u32, l: u32) -> Result<f64, DyadicError> {
    let cdf = tree
        .cdf()
        .ok_or_else(|| DyadicError::Malformed("tree carries no weight".into()))?;
    let fine = k.max(l);
    let (ck, cl) = (tree.boundaries(k)?, tree.boundaries(l)?);
    let mut total = 0.0;
    for (a, b) in tree.cells(fine)? {
        let mid = 0.5 * (a + b);
        let jk = ck.partition_point(|&x| x <= mid) - 1;
        let jl = cl.partition_point(|&x| x <= mid) - 1;
        total += WindowEnvelope::sign(jk) * WindowEnvelope::sign(jl) * cdf.band_mass(a, b);
    }
    Ok(total * cdf.norm_sq())
}

/// `||psi_k - delta_k||_2^2`, integrated exactly in the sweep coordinate.
///
/// With `a` the unsigned ramp value and `C` the polar cap,
/// `(1 - a C)^2 = (1-a)^2 + 2a(1-a)(1-C) + a^2(1-C)^2`. Each term is a window
/// in `t` times a function of `beta`; the `t` integral against the sweep
/// marginal of `|f0|^2` on each `beta` slice is a finite Fourier sum.
pub fn step2_deficit(tree: &DyadicTree, k: u32, f0: &SpectralCoeffs, ramp: RampShape) -> Result<f64, DyadicError> {
    let env = WindowEnvelope::new(tree, k, ramp)?;
    let group = f0.group();
    let band = f0.bandlimit();
    let grid = match (group, env.polar_cap) {
        (Group::Su2, Some(cap)) => {
            let n = ((4.0 * band.ceil()) as usize + 2).next_power_of_two().max(8);
            let pi = std::f64::consts::PI;
            let nodes = (2.0 * band.ceil()) as usize + 48;
            QuadratureGrid::su2_pieces(n, 2 * n, &[0.0, cap.angle, pi - cap.angle, pi], nodes)
        }
        _ => weight_grid(group, band),
    };
    let l_max = (grid.sweep_nodes() - 1) / 2;
    let u1 = env.profile_series(l_max, Piece::Defect1, false, 0.0);
    let (u2, u3) = if env.polar_cap.is_some() {
        (
            env.profile_series(l_max, Piece::Defect2, false, 0.0),
            env.profile_series(l_max, Piece::Defect3, false, 1.0),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let pair = |c: &MarginalSeries, u: &[Complex64]| -> f64 {
        c.coeffs()
            .iter()
            .map(|&(n, z)| z * u[(l_max as i64 - n) as usize])
            .sum::<Complex64>()
            .re
    };
    let parts: Vec<f64> = grid
        .chunks()
        .into_par_iter()
        .map(|chunk| {
            let vals: Vec<Complex64> = synthesize_grid(f0, &chunk)
                .into_iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect();
            let series = MarginalSeries::from_samples(&chunk, &vals);
            let mut part = pair(&series, &u1);
            if !u2.is_empty() {
                let beta = match chunk.point(0) {
                    GroupPoint::Su2(e) => e.beta,
                    _ => unreachable!(),
                };
                let open = 1.0 - env.cap(beta);
                if open != 0.0 {
                    part += open * pair(&series, &u2) + open * open * pair(&series, &u3);
                }
            }
            part
        })
        .collect();
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests;
