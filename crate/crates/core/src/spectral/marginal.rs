use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::group::QuadratureGrid;

/// Fourier series in the sweep coordinate of the marginal density of an
/// integrand. Integrals of the integrand over sweep bands `t^{-1}[a, b)`
/// are then closed-form sums, exact whenever the integrand is bandlimited
/// below the grid's resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSeries {
    coeffs: Vec<(i64, Complex64)>,
}

impl MarginalSeries {
    pub fn from_samples(grid: &QuadratureGrid, values: &[Complex64]) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count must match the grid");
        let n0 = grid.sweep_nodes();
        let mut marginal = vec![Complex64::new(0.0, 0.0); n0];
        for (i, v) in values.iter().enumerate() {
            marginal[grid.sweep_index(i)] += v * grid.weight(i);
        }
        FftPlanner::new().plan_fft_forward(n0).process(&mut marginal);
        let top = (n0 as i64 - 1) / 2;
        let coeffs = (-top..=top)
            .map(|n| (n, marginal[n.rem_euclid(n0 as i64) as usize]))
            .collect();
        MarginalSeries { coeffs }
    }

    /// Drops coefficients below `rel` times the total mass.
    pub fn prune(&mut self, rel: f64) {
        let cut = rel * self.total().norm();
        self.coeffs.retain(|(n, c)| *n == 0 || c.norm() > cut);
    }

    pub fn total(&self) -> Complex64 {
        self.coeffs
            .iter()
            .find(|(n, _)| *n == 0)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[(i64, Complex64)] {
        &self.coeffs
    }

    /// Integral over the band `t in [a, b)`.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.coeffs {
            if n == 0 {
                total += c * (b - a);
            } else {
                let w = std::f64::consts::TAU * n as f64;
                let diff = Complex64::cis(w * b) - Complex64::cis(w * a);
                total += c * diff / Complex64::new(0.0, w);
            }
        }
        total
    }
}
