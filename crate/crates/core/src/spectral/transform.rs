//! Structured analysis and synthesis on tensor grids.
//!
//! Uniform grids use a d-dimensional FFT. SU(2) grids are processed one beta
//! slice at a time: the alpha/gamma dependence of a Wigner matrix entry is a
//! pure exponential, so each slice reduces to a 2-D FFT followed by a
//! contraction with the small-d matrices at that beta.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::group::{wigner, GridLayout, IrrepLabel, QuadratureGrid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn fft_axes(buf: &mut [Complex64], sizes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total = buf.len();
    for axis in 0..sizes.len() {
        let n = sizes[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        let stride: usize = sizes[axis + 1..].iter().product();
        if stride == 1 {
            fft.process_with_scratch(buf, &mut scratch);
            continue;
        }
        let mut line = vec![ZERO; n];
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[start + off + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    buf[start + off + k * stride] = *v;
                }
            }
        }
    }
}

struct Fft2 {
    rows: usize,
    cols: usize,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(rows: usize, cols: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
        } else {
            (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
        };
        Fft2 {
            rows,
            cols,
            row_fft,
            col_fft,
        }
    }

    // buf is rows x cols, row-major; transforms both axes
    fn process(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![ZERO; self.row_fft.get_inplace_scratch_len().max(self.col_fft.get_inplace_scratch_len())];
        self.row_fft.process_with_scratch(buf, &mut scratch);
        let mut line = vec![ZERO; self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                line[r] = buf[r * self.cols + c];
            }
            self.col_fft.process_with_scratch(&mut line, &mut scratch);
            for r in 0..self.rows {
                buf[r * self.cols + c] = line[r];
            }
        }
    }
}

fn torus_index(label: &IrrepLabel, sizes: &[usize]) -> usize {
    match label {
        IrrepLabel::Circle(k) => k.rem_euclid(sizes[0] as i64) as usize,
        IrrepLabel::Torus(v) => v
            .iter()
            .zip(sizes)
            .fold(0usize, |acc, (k, &n)| acc * n + k.rem_euclid(n as i64) as usize),
        IrrepLabel::Su2 { .. } => unreachable!("uniform grids carry abelian labels"),
    }
}

/// Quadrature coefficients `sum_i w_i f(g_i) pi(g_i)^*` for every label.
pub(crate) fn analyze_on_grid(
    values: &[Complex64],
    grid: &QuadratureGrid,
    labels: &[IrrepLabel],
) -> Vec<DMatrix<Complex64>> {
    match grid.layout() {
        GridLayout::Uniform { sizes } => {
            let mut buf = values.to_vec();
            fft_axes(&mut buf, sizes, false);
            let scale = 1.0 / buf.len() as f64;
            labels
                .iter()
                .map(|l| DMatrix::from_element(1, 1, buf[torus_index(l, sizes)] * scale))
                .collect()
        }
        GridLayout::Su2 {
            n_alpha,
            n_gamma,
            betas,
            beta_weights,
        } => {
            let two_j_max = labels.iter().map(two_j_of).max().unwrap_or(0);
            let need = parities(labels);
            let plan = Fft2::new(*n_alpha, *n_gamma, true);
            let slice_len = n_alpha * n_gamma;
            let partials: Vec<Vec<DMatrix<Complex64>>> = betas
                .par_iter()
                .enumerate()
                .map(|(l, &beta)| {
                    let slice = &values[l * slice_len..(l + 1) * slice_len];
                    let w = beta_weights[l] / slice_len as f64;
                    analyze_slice(slice, beta, w, &plan, labels, two_j_max, need)
                })
                .collect();
            let mut out: Vec<DMatrix<Complex64>> =
                labels.iter().map(|l| DMatrix::zeros(l.degree(), l.degree())).collect();
            for part in partials {
                for (acc, p) in out.iter_mut().zip(part) {
                    *acc += p;
                }
            }
            out
        }
    }
}

fn two_j_of(label: &IrrepLabel) -> u32 {
    match label {
        IrrepLabel::Su2 { two_j } => *two_j,
        _ => unreachable!("SU(2) grids carry spin labels"),
    }
}

fn parities(labels: &[IrrepLabel]) -> [bool; 2] {
    let mut need = [false; 2];
    for l in labels {
        need[(two_j_of(l) % 2) as usize] = true;
    }
    need
}

fn half_twist(rows: usize, cols: usize, buf: &mut [Complex64], sign: f64) {
    for a in 0..rows {
        let z = Complex64::cis(sign * std::f64::consts::PI * a as f64 / rows as f64);
        for v in &mut buf[a * cols..(a + 1) * cols] {
            *v *= z;
        }
    }
}

fn analyze_slice(
    slice: &[Complex64],
    beta: f64,
    weight: f64,
    plan: &Fft2,
    labels: &[IrrepLabel],
    two_j_max: u32,
    need: [bool; 2],
) -> Vec<DMatrix<Complex64>> {
    let (na, ng) = (plan.rows as i64, plan.cols as i64);
    let mut spectra: [Option<Vec<Complex64>>; 2] = [None, None];
    for p in 0..2 {
        if !need[p] {
            continue;
        }
        let mut buf = slice.to_vec();
        if p == 1 {
            half_twist(plan.rows, plan.cols, &mut buf, 1.0);
        }
        plan.process(&mut buf);
        spectra[p] = Some(buf);
    }
    let ds: Vec<Option<DMatrix<f64>>> = (0..=two_j_max)
        .map(|tj| {
            if labels.iter().any(|l| two_j_of(l) == tj) {
                Some(wigner::small_d(tj, beta))
            } else {
                None
            }
        })
        .collect();
    labels
        .iter()
        .map(|l| {
            let tj = two_j_of(l) as i64;
            let p = (tj % 2) as usize;
            let spec = spectra[p].as_ref().expect("parity computed");
            let d = ds[tj as usize].as_ref().expect("d matrix computed");
            let n = (tj + 1) as usize;
            DMatrix::from_fn(n, n, |r, c| {
                // twice m for row and column
                let two_mr = tj - 2 * r as i64;
                let two_mc = tj - 2 * c as i64;
                let u = ((two_mc - p as i64) / 2).rem_euclid(na) as usize;
                let v = two_mr.rem_euclid(ng) as usize;
                spec[u * plan.cols + v] * (d[(c, r)] * weight)
            })
        })
        .collect()
}

/// Values of `sum_pi d_pi tr(pi(g) A(pi))` at every grid node.
pub(crate) fn synthesize_on_grid(
    coeffs: &[(&IrrepLabel, &DMatrix<Complex64>)],
    grid: &QuadratureGrid,
) -> Vec<Complex64> {
    match grid.layout() {
        GridLayout::Uniform { sizes } => {
            let mut buf = vec![ZERO; grid.len()];
            for (l, m) in coeffs {
                buf[torus_index(l, sizes)] += m[(0, 0)];
            }
            fft_axes(&mut buf, sizes, true);
            buf
        }
        GridLayout::Su2 {
            n_alpha,
            n_gamma,
            betas,
            ..
        } => {
            let plan = Fft2::new(*n_alpha, *n_gamma, false);
            betas
                .par_iter()
                .flat_map_iter(|&beta| synthesize_slice(coeffs, beta, &plan))
                .collect()
        }
    }
}

fn synthesize_slice(coeffs: &[(&IrrepLabel, &DMatrix<Complex64>)], beta: f64, plan: &Fft2) -> Vec<Complex64> {
    let (na, ng) = (plan.rows as i64, plan.cols as i64);
    let len = plan.rows * plan.cols;
    let mut h: [Option<Vec<Complex64>>; 2] = [None, None];
    for (l, a) in coeffs {
        let tj = two_j_of(l) as i64;
        let p = (tj % 2) as usize;
        let buf = h[p].get_or_insert_with(|| vec![ZERO; len]);
        let d = wigner::small_d(tj as u32, beta);
        let deg = (tj + 1) as f64;
        let n = (tj + 1) as usize;
        for r in 0..n {
            let two_mr = tj - 2 * r as i64;
            let u = ((two_mr - p as i64) / 2).rem_euclid(na) as usize;
            for c in 0..n {
                let two_mc = tj - 2 * c as i64;
                let v = two_mc.rem_euclid(ng) as usize;
                buf[u * plan.cols + v] += a[(c, r)] * (deg * d[(r, c)]);
            }
        }
    }
    let mut out = vec![ZERO; len];
    for (p, buf) in h.iter_mut().enumerate() {
        let Some(buf) = buf else { continue };
        plan.process(buf);
        if p == 1 {
            half_twist(plan.rows, plan.cols, buf, -1.0);
        }
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o += v;
        }
    }
    out
}
