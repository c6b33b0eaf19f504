use super::{Group, GroupPoint, TAU};
use crate::group::EulerAngles;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// How the nodes of a grid are arranged. Node index order: for uniform grids
/// the first angle is the slowest axis; for SU(2) the order is
/// `(beta, alpha, gamma)` with `gamma` fastest.
#[derive(Clone, Debug, PartialEq)]
pub enum GridLayout {
    Uniform {
        sizes: Vec<usize>,
    },
    Su2 {
        n_alpha: usize,
        n_gamma: usize,
        betas: Vec<f64>,
        beta_weights: Vec<f64>,
    },
}

/// A quadrature rule for the normalized Haar measure.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    group: Group,
    layout: GridLayout,
    exactness: u32,
}

/// Minimal exact grid for bandlimit `b`: `2b+1` nodes per circle axis; on
/// SU(2) `2b+1` in alpha, `4b+1` in gamma and `b+1` Gauss-Legendre nodes in
/// `cos beta`.
pub fn haar_grid(group: Group, bandlimit: u32) -> QuadratureGrid {
    let b = bandlimit as usize;
    match group {
        Group::Circle | Group::Torus(_) => QuadratureGrid::uniform(group, 2 * b + 1),
        Group::Su2 => QuadratureGrid::su2(2 * b + 1, b + 1, 4 * b + 1),
    }
}

impl QuadratureGrid {
    /// Equal-weight grid with `n` nodes per axis on the circle or torus.
    pub fn uniform(group: Group, n: usize) -> Self {
        Self::uniform_sizes(group, vec![n; group.dimension()])
    }

    /// Equal-weight grid with `sizes[i]` nodes along axis `i`; axis 0 is the
    /// sweep axis.
    pub fn uniform_sizes(group: Group, sizes: Vec<usize>) -> Self {
        assert!(!matches!(group, Group::Su2), "uniform grids are for abelian groups");
        assert_eq!(sizes.len(), group.dimension());
        assert!(sizes.iter().all(|&n| n >= 1), "grid needs at least one node per axis");
        let exactness = sizes.iter().map(|n| (n - 1) / 2).min().unwrap_or(0) as u32;
        QuadratureGrid {
            group,
            layout: GridLayout::Uniform { sizes },
            exactness,
        }
    }

    /// Tensor grid on SU(2); the beta rule is Gauss-Legendre in `cos beta`.
    pub fn su2(n_alpha: usize, n_beta: usize, n_gamma: usize) -> Self {
        assert!(n_alpha >= 1 && n_beta >= 1 && n_gamma >= 1);
        let (x, w) = gauss_legendre(n_beta);
        let betas = x.iter().rev().map(|c| c.clamp(-1.0, 1.0).acos()).collect();
        let beta_weights = w.iter().rev().map(|w| w / 2.0).collect();
        let exactness = ((n_alpha - 1) / 2).min((n_gamma - 1) / 4).min(n_beta - 1) as u32;
        QuadratureGrid {
            group: Group::Su2,
            layout: GridLayout::Su2 {
                n_alpha,
                n_gamma,
                betas,
                beta_weights,
            },
            exactness,
        }
    }

    /// SU(2) grid whose beta rule is Gauss-Legendre in `beta` itself on each
    /// piece between consecutive `breaks`, weighted by the Haar density
    /// `sin(beta) / 2`. Suited to integrands that are smooth in `beta` but
    /// not polynomial in `cos beta`.
    pub fn su2_pieces(n_alpha: usize, n_gamma: usize, breaks: &[f64], nodes_per_piece: usize) -> Self {
        let (x, w) = gauss_legendre(nodes_per_piece);
        let mut betas = Vec::new();
        let mut beta_weights = Vec::new();
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi <= lo {
                continue;
            }
            let half = (hi - lo) / 2.0;
            for (xi, wi) in x.iter().zip(&w) {
                let b = lo + half * (xi + 1.0);
                betas.push(b);
                beta_weights.push(wi * half * b.sin() / 2.0);
            }
        }
        QuadratureGrid {
            group: Group::Su2,
            layout: GridLayout::Su2 {
                n_alpha,
                n_gamma,
                betas,
                beta_weights,
            },
            exactness: ((n_alpha - 1) / 2).min((n_gamma - 1) / 4) as u32,
        }
    }

    /// A power-of-two grid used for sup norms and for analysing functions
    /// that are not bandlimited. About `factor` nodes per shortest wavelength
    /// of bandlimit `b`, with at least `min_sweep` nodes along the sweep
    /// axis.
    pub fn fine(group: Group, bandlimit: f64, factor: usize, min_sweep: usize) -> Self {
        let b = bandlimit.max(1.0).ceil() as usize;
        let base = (2 * factor * b).next_power_of_two();
        match group {
            Group::Circle => QuadratureGrid::uniform(group, base.max(min_sweep.next_power_of_two())),
            Group::Torus(d) => {
                let mut sizes = vec![base; d];
                sizes[0] = base.max(min_sweep.next_power_of_two());
                QuadratureGrid::uniform_sizes(group, sizes)
            }
            Group::Su2 => {
                let n_alpha = base.max(min_sweep.next_power_of_two()).max(8);
                let n_gamma = (2 * base).max(8);
                let n_beta = factor * (b + 1);
                QuadratureGrid::su2(n_alpha, n_beta, n_gamma)
            }
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    /// Largest bandlimit `B` such that products of two matrix coefficients
    /// of bandlimit at most `B` are integrated exactly.
    pub fn exactness(&self) -> u32 {
        self.exactness
    }

    pub fn len(&self) -> usize {
        match &self.layout {
            GridLayout::Uniform { sizes } => sizes.iter().product(),
            GridLayout::Su2 {
                n_alpha,
                n_gamma,
                betas,
                ..
            } => n_alpha * n_gamma * betas.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct nodes along the sweep axis.
    pub fn sweep_nodes(&self) -> usize {
        match &self.layout {
            GridLayout::Uniform { sizes } => sizes[0],
            GridLayout::Su2 { n_alpha, .. } => *n_alpha,
        }
    }

    /// Index along the sweep axis of node `i`.
    pub fn sweep_index(&self, i: usize) -> usize {
        match &self.layout {
            GridLayout::Uniform { sizes } => i / sizes[1..].iter().product::<usize>(),
            GridLayout::Su2 { n_alpha, n_gamma, .. } => (i / n_gamma) % n_alpha,
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.layout {
            GridLayout::Uniform { sizes } => 1.0 / sizes.iter().product::<usize>() as f64,
            GridLayout::Su2 {
                n_alpha,
                n_gamma,
                beta_weights,
                ..
            } => {
                let l = i / (n_alpha * n_gamma);
                beta_weights[l] / (n_alpha * n_gamma) as f64
            }
        }
    }

    pub fn point(&self, i: usize) -> GroupPoint {
        match &self.layout {
            GridLayout::Uniform { sizes } => {
                if sizes.len() == 1 {
                    return GroupPoint::Circle(i as f64 * TAU / sizes[0] as f64);
                }
                let mut idx = i;
                let mut theta = vec![0.0; sizes.len()];
                for (slot, n) in theta.iter_mut().zip(sizes).rev() {
                    *slot = (idx % n) as f64 * TAU / *n as f64;
                    idx /= n;
                }
                GroupPoint::Torus(theta)
            }
            GridLayout::Su2 {
                n_alpha,
                n_gamma,
                betas,
                ..
            } => {
                let c = i % n_gamma;
                let a = (i / n_gamma) % n_alpha;
                let l = i / (n_gamma * n_alpha);
                GroupPoint::Su2(EulerAngles {
                    alpha: TAU * a as f64 / *n_alpha as f64,
                    beta: betas[l],
                    gamma: 2.0 * TAU * c as f64 / *n_gamma as f64,
                })
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.weight(i))
    }

    /// Splits the grid into independent pieces whose node lists concatenate
    /// to this grid: one piece per beta node on SU(2), the whole grid
    /// otherwise.
    pub fn chunks(&self) -> Vec<QuadratureGrid> {
        match &self.layout {
            GridLayout::Uniform { .. } => vec![self.clone()],
            GridLayout::Su2 {
                n_alpha,
                n_gamma,
                betas,
                beta_weights,
            } => betas
                .iter()
                .zip(beta_weights)
                .map(|(&b, &w)| QuadratureGrid {
                    group: Group::Su2,
                    layout: GridLayout::Su2 {
                        n_alpha: *n_alpha,
                        n_gamma: *n_gamma,
                        betas: vec![b],
                        beta_weights: vec![w],
                    },
                    exactness: 0,
                })
                .collect(),
        }
    }
}
