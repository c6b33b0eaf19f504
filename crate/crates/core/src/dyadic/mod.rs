//! Dyadic decomposition of `nu = |f0|^2 dmu` into sweep-coordinate bands.
//!
//! Level `k` splits `[0, 1)` into `2^k` half-open cells of equal `nu`-mass.
//! Boundaries at every level are taken from the deepest level, so nesting
//! holds exactly. Each cell carries a closed core obtained by shrinking both
//! ends; on SU(2) the cores also exclude two polar caps in `beta` so that
//! the Urysohn functions built on them are continuous on the group.

use num_complex::Complex64;
use thiserror::Error;

use crate::group::{Group, GroupPoint, QuadratureGrid};
use crate::spectral::{synthesize_grid, MarginalSeries, SpectralCoeffs};

pub const DEFAULT_MESH: usize = 1 << 16;
pub const MAX_MESH: usize = 1 << 22;
/// Minimum number of mesh intervals per deepest-level cell.
pub const MIN_MESH_PER_CELL: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadicError {
    #[error("degenerate weight: f0 vanishes identically")]
    DegenerateWeight,
    #[error("level {k_max} is under-resolved by the CDF mesh; need a mesh of at least {required_mesh} points")]
    UnderResolved { k_max: u32, required_mesh: usize },
    #[error("level {k} is outside 1..={k_max}")]
    BadLevel { k: u32, k_max: u32 },
    #[error("malformed tree: {0}")]
    Malformed(String),
}

/// Grid on which `|f0|^2` (sweep bandlimit `2b`) has an alias-free
/// marginal and whose beta rule integrates it to near machine precision.
pub(crate) fn weight_grid(group: Group, band: f64) -> QuadratureGrid {
    let b = band.ceil() as usize;
    let n = (4 * b + 2).next_power_of_two().max(8);
    match group {
        Group::Circle | Group::Torus(_) => QuadratureGrid::uniform(group, n),
        Group::Su2 => QuadratureGrid::su2_pieces(n, 2 * n, &[0.0, std::f64::consts::PI], 2 * b + 40),
    }
}

/// The normalized cumulative distribution `F(t) = nu(t^{-1}[0, t)) / nu(G)`.
#[derive(Clone, Debug)]
pub struct PushforwardCDF {
    series: MarginalSeries,
    norm_sq: f64,
    mesh: Vec<f64>,
}

/// Builds the CDF of `|f0|^2` from the exact Fourier series of its sweep
/// marginal, tabulated on `mesh_size + 1` points.
pub fn pushforward_cdf(f0: &SpectralCoeffs, mesh_size: usize) -> Result<PushforwardCDF, DyadicError> {
    if f0.support().is_empty() {
        return Err(DyadicError::DegenerateWeight);
    }
    let grid = weight_grid(f0.group(), f0.bandlimit());
    let vals: Vec<Complex64> = synthesize_grid(f0, &grid)
        .into_iter()
        .map(|v| Complex64::new(v.norm_sqr(), 0.0))
        .collect();
    let mut series = MarginalSeries::from_samples(&grid, &vals);
    let norm_sq = series.total().re;
    if norm_sq.is_nan() || norm_sq <= 1e-300 {
        return Err(DyadicError::DegenerateWeight);
    }
    series.prune(1e-15);
    let mut cdf = PushforwardCDF {
        series,
        norm_sq,
        mesh: Vec::new(),
    };
    cdf.tabulate(mesh_size.max(1));
    Ok(cdf)
}

impl PushforwardCDF {
    fn tabulate(&mut self, m: usize) {
        let mut mesh: Vec<f64> = (0..=m).map(|i| self.eval(i as f64 / m as f64)).collect();
        mesh[0] = 0.0;
        mesh[m] = 1.0;
        let mut run = 0.0f64;
        for v in mesh.iter_mut() {
            run = run.max(*v);
            *v = run;
        }
        self.mesh = mesh;
    }

    /// `||f0||_2^2 = nu(G)`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn mesh_size(&self) -> usize {
        self.mesh.len() - 1
    }

    /// Tabulated values `F(i / mesh_size)`.
    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    /// `F(t)` from the series, clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        (self.series.integral(0.0, t).re / self.norm_sq).clamp(0.0, 1.0)
    }

    /// Normalized mass of the band `[a, b)`.
    pub fn band_mass(&self, a: f64, b: f64) -> f64 {
        self.series.integral(a, b).re / self.norm_sq
    }

    /// Leftmost `t` with `F(t) = p`: the mesh brackets the root, bisection on
    /// the series refines it.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let m = self.mesh_size();
        let i = self.mesh.partition_point(|&v| v < p).clamp(1, m);
        let (mut lo, mut hi) = ((i - 1) as f64 / m as f64, i as f64 / m as f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Equal-`nu` dyadic cells at levels `1..=k_max` of the sweep coordinate.
#[derive(Clone, Debug)]
pub struct DyadicTree {
    group: Group,
    levels: Vec<Vec<f64>>,
    cdf: Option<PushforwardCDF>,
}

/// Boundaries at level `k` are the leftmost solutions of `F(b) = j 2^{-k}`.
pub fn build_tree(group: Group, cdf: &PushforwardCDF, k_max: u32) -> Result<DyadicTree, DyadicError> {
    if k_max == 0 {
        return Err(DyadicError::BadLevel { k: 0, k_max });
    }
    let cells = 1usize << k_max;
    let deepest: Vec<f64> = (0..=cells).map(|j| cdf.quantile(j as f64 / cells as f64)).collect();
    let min_width = deepest.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mesh = cdf.mesh_size() as f64;
    if min_width * mesh < MIN_MESH_PER_CELL {
        let required = (MIN_MESH_PER_CELL / min_width.max(1e-300)).ceil();
        let required_mesh = if required.is_finite() && required < 1e18 {
            (required as usize).next_power_of_two()
        } else {
            usize::MAX
        };
        return Err(DyadicError::UnderResolved { k_max, required_mesh });
    }
    let levels = (1..=k_max)
        .map(|k| {
            let step = 1usize << (k_max - k);
            deepest.iter().step_by(step).copied().collect()
        })
        .collect();
    Ok(DyadicTree {
        group,
        levels,
        cdf: Some(cdf.clone()),
    })
}

impl DyadicTree {
    /// Builds the CDF of `|f0|^2` and the tree, refining the mesh fourfold
    /// until the deepest cells are resolved.
    pub fn from_weight(f0: &SpectralCoeffs, k_max: u32) -> Result<Self, DyadicError> {
        let mut mesh = DEFAULT_MESH;
        let mut cdf = pushforward_cdf(f0, mesh)?;
        loop {
            match build_tree(f0.group(), &cdf, k_max) {
                Err(DyadicError::UnderResolved { required_mesh, .. }) if mesh < MAX_MESH => {
                    mesh = required_mesh.clamp(4 * mesh, MAX_MESH);
                    cdf.tabulate(mesh);
                }
                other => return other,
            }
        }
    }

    /// A tree read back from stored boundaries; carries no CDF.
    pub fn from_boundaries(group: Group, levels: Vec<Vec<f64>>) -> Result<Self, DyadicError> {
        if levels.is_empty() {
            return Err(DyadicError::Malformed("no levels".into()));
        }
        for (i, b) in levels.iter().enumerate() {
            let k = i + 1;
            if b.len() != (1 << k) + 1 {
                return Err(DyadicError::Malformed(format!("level {k} has {} boundaries", b.len())));
            }
            if b[0] != 0.0 || b[b.len() - 1] != 1.0 {
                return Err(DyadicError::Malformed(format!("level {k} does not span [0, 1]")));
            }
            if b.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(DyadicError::Malformed(format!("level {k} boundaries are not increasing")));
            }
        }
        Ok(DyadicTree {
            group,
            levels,
            cdf: None,
        })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn k_max(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn cdf(&self) -> Option<&PushforwardCDF> {
        self.cdf.as_ref()
    }

    fn check_level(&self, k: u32) -> Result<(), DyadicError> {
        if k == 0 || k > self.k_max() {
            return Err(DyadicError::BadLevel { k, k_max: self.k_max() });
        }
        Ok(())
    }

    /// The `2^k + 1` boundaries of level `k`.
    pub fn boundaries(&self, k: u32) -> Result<&[f64], DyadicError> {
        self.check_level(k)?;
        Ok(&self.levels[k as usize - 1])
    }

    pub fn cells(&self, k: u32) -> Result<Vec<(f64, f64)>, DyadicError> {
        Ok(self.boundaries(k)?.windows(2).map(|w| (w[0], w[1])).collect())
    }

    /// Zero-based index of the level-`k` cell containing `t`.
    pub fn cell_of(&self, k: u32, t: f64) -> Result<usize, DyadicError> {
        let b = self.boundaries(k)?;
        Ok(b.partition_point(|&x| x <= t).clamp(1, b.len() - 1) - 1)
    }

    /// Normalized `nu`-masses of the level-`k` cells, when the CDF is known.
    pub fn nu_masses(&self, k: u32) -> Result<Option<Vec<f64>>, DyadicError> {
        let cells = self.cells(k)?;
        Ok(self
            .cdf
            .as_ref()
            .map(|cdf| cells.iter().map(|&(a, b)| cdf.band_mass(a, b)).collect()))
    }
}

/// Shrink applied to each end of a cell of `width` at level `k`.
pub fn shrink_amount(k: u32, width: f64) -> f64 {
    (2f64.powi(-2 * k as i32 - 2)).min(width / 4.0)
}

/// Two polar caps `beta < angle` and `beta > pi - angle` of total Haar
/// measure `fraction`, removed from every SU(2) core.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarCap {
    pub fraction: f64,
    pub angle: f64,
}

impl PolarCap {
    /// Cap fraction `2^{-2k-2} / (widest cell)` at level `k`.
    pub fn for_level(k: u32, max_width: f64) -> Self {
        let fraction = 2f64.powi(-2 * k as i32 - 2) / max_width;
        Self::from_fraction(fraction)
    }

    pub fn from_fraction(fraction: f64) -> Self {
        PolarCap {
            fraction,
            angle: (1.0 - fraction).clamp(-1.0, 1.0).acos(),
        }
    }

    pub fn contains(&self, beta: f64) -> bool {
        beta < self.angle || beta > std::f64::consts::PI - self.angle
    }
}

/// The compact cores `K_j^k` of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct Cores {
    pub level: u32,
    pub cells: Vec<(f64, f64)>,
    pub intervals: Vec<(f64, f64)>,
    pub polar_cap: Option<PolarCap>,
}

impl Cores {
    /// Haar measure of `K_j^k`.
    pub fn core_measure(&self, j: usize) -> f64 {
        let (a, b) = self.intervals[j];
        (b - a) * (1.0 - self.polar_cap.map_or(0.0, |c| c.fraction))
    }

    /// `mu(D_j \ K_j)`.
    pub fn deficit(&self, j: usize) -> f64 {
        let (a, b) = self.cells[j];
        (b - a) - self.core_measure(j)
    }

    /// `mu` of the union of all cores.
    pub fn measure(&self) -> f64 {
        (0..self.intervals.len()).map(|j| self.core_measure(j)).sum()
    }

    /// Whether `g` lies in some core.
    pub fn contains(&self, g: &GroupPoint) -> bool {
        if let (Some(cap), GroupPoint::Su2(e)) = (self.polar_cap, g) {
            if cap.contains(e.beta) {
                return false;
            }
        }
        self.contains_sweep(crate::group::sweep_coordinate(g))
    }

    /// Whether the sweep value `t` lies in some core interval.
    pub fn contains_sweep(&self, t: f64) -> bool {
        let j = self.intervals.partition_point(|&(a, _)| a <= t);
        j > 0 && t <= self.intervals[j - 1].1
    }
}

/// Shrinks each level-`k` cell by `min(2^{-2k-2}, width/4)` at both ends.
pub fn shrink_cores(tree: &DyadicTree, k: u32) -> Result<Cores, DyadicError> {
    let cells = tree.cells(k)?;
    let intervals = cells
        .iter()
        .map(|&(a, b)| {
            let s = shrink_amount(k, b - a);
            (a + s, b - s)
        })
        .collect();
    let polar_cap = match tree.group() {
        Group::Su2 => {
            let max_width = cells.iter().map(|(a, b)| b - a).fold(0.0, f64::max);
            Some(PolarCap::for_level(k, max_width))
        }
        _ => None,
    };
    Ok(Cores {
        level: k,
        cells,
        intervals,
        polar_cap,
    })
}

/// `mu(Omega)` for the cores of level `k`.
pub fn omega_measure(tree: &DyadicTree, k: u32) -> Result<f64, DyadicError> {
    Ok(shrink_cores(tree, k)?.measure())
}
