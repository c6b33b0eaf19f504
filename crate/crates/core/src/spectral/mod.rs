//! Fourier analysis and synthesis against the dual object.
//!
//! A trigonometric polynomial is stored exactly as its finite family of
//! coefficient matrices `A(pi)`, evaluated by `sum_pi d_pi tr(pi(g) A(pi))`.
//! Coefficients are computed by `f^(pi) = integral f(g) pi(g)^* dmu(g)`.

mod marginal;
mod transform;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::group::{enumerate_irreps, irrep_matrix, Group, GroupError, GroupPoint, IrrepLabel, QuadratureGrid};

pub use marginal::MarginalSeries;

/// Relative threshold deciding spectral support membership.
pub const SUPPORT_REL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("coefficient for {label} must be {expected}x{expected}, got {rows}x{cols}")]
    Dimension {
        label: String,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("grid has {expected} nodes but {got} samples were given")]
    GridMismatch { expected: usize, got: usize },
    #[error("grid belongs to {grid}, coefficients to {coeffs}")]
    GroupMismatch { grid: String, coeffs: String },
}

/// Anything that can be evaluated pointwise on a group.
pub trait GroupFunction: Sync {
    fn group(&self) -> Group;

    fn eval(&self, g: &GroupPoint) -> Complex64;

    /// Values at every node of `grid`, in node order.
    fn sample(&self, grid: &QuadratureGrid) -> Vec<Complex64> {
        (0..grid.len()).into_par_iter().map(|i| self.eval(&grid.point(i))).collect()
    }

    /// Values of `beta` splitting `[0, pi]` into pieces on which the
    /// function is smooth. Only meaningful on SU(2).
    fn beta_breaks(&self) -> Vec<f64> {
        vec![0.0, std::f64::consts::PI]
    }

    /// Bandlimit of the dependence on every coordinate except the sweep
    /// coordinate, when known.
    fn side_band(&self) -> f64 {
        0.0
    }

    /// Fourier coefficients at `labels`, when they can be computed without
    /// sampling.
    fn exact_coeffs(&self, _labels: &[IrrepLabel]) -> Option<SpectralCoeffs> {
        None
    }
}

/// Samples of a function aligned with a quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: &QuadratureGrid, values: Vec<Complex64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::GridMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(GridFunction { values })
    }

    pub fn sample<F: GroupFunction + ?Sized>(f: &F, grid: &QuadratureGrid) -> Self {
        GridFunction { values: f.sample(grid) }
    }

    pub fn from_fn(grid: &QuadratureGrid, f: impl Fn(&GroupPoint) -> Complex64) -> Self {
        GridFunction {
            values: grid.points().map(|g| f(&g)).collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn check(&self, grid: &QuadratureGrid) -> Result<(), SpectralError> {
        if self.values.len() != grid.len() {
            return Err(SpectralError::GridMismatch {
                expected: grid.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Coefficient matrices of a trigonometric polynomial, keyed by label in
/// canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    group: Group,
    coeffs: BTreeMap<IrrepLabel, DMatrix<Complex64>>,
}

impl SpectralCoeffs {
    pub fn new(group: Group) -> Self {
        SpectralCoeffs {
            group,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant function `c`.
    pub fn constant(group: Group, c: Complex64) -> Self {
        let mut out = Self::new(group);
        let triv = enumerate_irreps(group, 0).remove(0);
        out.coeffs.insert(triv, DMatrix::from_element(1, 1, c));
        out
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn insert(&mut self, label: IrrepLabel, m: DMatrix<Complex64>) -> Result<(), SpectralError> {
        self.group.check_label(&label)?;
        let d = label.degree();
        if m.nrows() != d || m.ncols() != d {
            return Err(SpectralError::Dimension {
                label: label.to_string(),
                expected: d,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        self.coeffs.insert(label, m);
        Ok(())
    }

    pub fn get(&self, label: &IrrepLabel) -> Option<&DMatrix<Complex64>> {
        self.coeffs.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IrrepLabel, &DMatrix<Complex64>)> {
        self.coeffs.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &IrrepLabel> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Twice the largest stored bandlimit.
    pub fn band2(&self) -> u64 {
        self.coeffs.keys().map(|l| l.band2()).max().unwrap_or(0)
    }

    pub fn bandlimit(&self) -> f64 {
        self.band2() as f64 / 2.0
    }

    pub fn max_entry(&self) -> f64 {
        self.coeffs
            .values()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `1e-12 * max(max entry, 1)`.
    pub fn support_threshold(&self) -> f64 {
        SUPPORT_REL * self.max_entry().max(1.0)
    }

    /// Labels whose largest entry exceeds the support threshold.
    pub fn support(&self) -> BTreeSet<IrrepLabel> {
        let tau = self.support_threshold();
        self.coeffs
            .iter()
            .filter(|(_, m)| m.iter().any(|z| z.norm() > tau))
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// Drops every label outside the support.
    pub fn normalized(mut self) -> Self {
        let keep = self.support();
        self.coeffs.retain(|l, _| keep.contains(l));
        self
    }

    /// Keeps only the labels in `set`.
    pub fn restrict(&self, set: &BTreeSet<IrrepLabel>) -> Self {
        SpectralCoeffs {
            group: self.group,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(l, _)| set.contains(*l))
                .map(|(l, m)| (l.clone(), m.clone()))
                .collect(),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, m| m * c)
    }

    /// Applies `f` to every coefficient matrix.
    pub fn map(&self, f: impl Fn(&IrrepLabel, &DMatrix<Complex64>) -> DMatrix<Complex64>) -> Self {
        SpectralCoeffs {
            group: self.group,
            coeffs: self.coeffs.iter().map(|(l, m)| (l.clone(), f(l, m))).collect(),
        }
    }

    pub fn add(&self, other: &SpectralCoeffs) -> Self {
        let mut out = self.clone();
        for (l, m) in &other.coeffs {
            out.coeffs
                .entry(l.clone())
                .and_modify(|acc| *acc += m)
                .or_insert_with(|| m.clone());
        }
        out
    }

    pub fn sub(&self, other: &SpectralCoeffs) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn from_raw(group: Group, raw: &RawCoeffs) -> Result<Self, RawCoeffsError> {
        let mut out = Self::new(group);
        for (key, entries) in &raw.0 {
            let label = IrrepLabel::parse(group, key).map_err(RawCoeffsError::Label)?;
            let d = label.degree();
            if entries.len() != d * d {
                return Err(RawCoeffsError::Length {
                    label: key.clone(),
                    expected: d * d,
                    got: entries.len(),
                });
            }
            let m = DMatrix::from_row_iterator(d, d, entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
            if out.coeffs.insert(label, m).is_some() {
                return Err(RawCoeffsError::Duplicate(key.clone()));
            }
        }
        Ok(out)
    }

    pub fn to_raw(&self) -> RawCoeffs {
        RawCoeffs(
            self.coeffs
                .iter()
                .map(|(l, m)| (l.to_string(), row_major(m)))
                .collect(),
        )
    }
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

impl Serialize for SpectralCoeffs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl GroupFunction for SpectralCoeffs {
    fn group(&self) -> Group {
        self.group
    }

    fn eval(&self, g: &GroupPoint) -> Complex64 {
        synthesize(self, g)
    }

    fn sample(&self, grid: &QuadratureGrid) -> Vec<Complex64> {
        synthesize_grid(self, grid)
    }

    fn side_band(&self) -> f64 {
        self.bandlimit()
    }

    fn exact_coeffs(&self, labels: &[IrrepLabel]) -> Option<SpectralCoeffs> {
        let mut out = SpectralCoeffs::new(self.group);
        for l in labels {
            let d = l.degree();
            let m = self.coeffs.get(l).cloned().unwrap_or_else(|| DMatrix::zeros(d, d));
            out.coeffs.insert(l.clone(), m);
        }
        Some(out)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RawCoeffsError {
    #[error(transparent)]
    Label(GroupError),
    #[error("coefficient {label} has {got} entries, expected {expected}")]
    Length { label: String, expected: usize, got: usize },
    #[error("duplicate coefficient label {0}")]
    Duplicate(String),
}

/// Serialized coefficients: a JSON object from label strings to row-major
/// `[re, im]` arrays. Keeps the file order on both read and write.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawCoeffs(pub Vec<(String, Vec<[f64; 2]>)>);

impl Serialize for RawCoeffs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for RawCoeffs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawCoeffs;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from irrep labels to [re, im] arrays")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<RawCoeffs, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, Vec<[f64; 2]>>()? {
                    out.push((k, v));
                }
                Ok(RawCoeffs(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// `f^(pi)` by direct quadrature, one node at a time.
pub fn fourier_coeff(
    f: &GridFunction,
    label: &IrrepLabel,
    grid: &QuadratureGrid,
) -> Result<DMatrix<Complex64>, SpectralError> {
    f.check(grid)?;
    let d = label.degree();
    let mut acc = DMatrix::zeros(d, d);
    for (i, v) in f.values.iter().enumerate() {
        let p = irrep_matrix(grid.group(), label, &grid.point(i))?;
        acc += p.adjoint() * (v * grid.weight(i));
    }
    Ok(acc)
}

/// Coefficients at every label of bandlimit at most `bandlimit`.
pub fn analyze(f: &GridFunction, grid: &QuadratureGrid, bandlimit: u32) -> Result<SpectralCoeffs, SpectralError> {
    analyze_labels(f, grid, &enumerate_irreps(grid.group(), bandlimit))
}

/// Coefficients at the given labels.
pub fn analyze_labels(
    f: &GridFunction,
    grid: &QuadratureGrid,
    labels: &[IrrepLabel],
) -> Result<SpectralCoeffs, SpectralError> {
    f.check(grid)?;
    for l in labels {
        grid.group().check_label(l)?;
    }
    let mats = transform::analyze_on_grid(&f.values, grid, labels);
    Ok(SpectralCoeffs {
        group: grid.group(),
        coeffs: labels.iter().cloned().zip(mats).collect(),
    })
}

/// Analysis of a function that is too large to sample at once: on SU(2) the
/// grid is processed one beta slice at a time.
pub fn analyze_streaming<F: GroupFunction + ?Sized>(
    f: &F,
    grid: &QuadratureGrid,
    labels: &[IrrepLabel],
) -> Result<SpectralCoeffs, SpectralError> {
    let mut out: Option<SpectralCoeffs> = None;
    for chunk in grid.chunks() {
        let part = analyze_labels(&GridFunction::sample(f, &chunk), &chunk, labels)?;
        out = Some(match out {
            None => part,
            Some(acc) => acc.add(&part),
        });
    }
    Ok(out.unwrap_or_else(|| SpectralCoeffs::new(grid.group())))
}

/// `sum_pi d_pi tr(pi(g) A(pi))` at one point.
pub fn synthesize(a: &SpectralCoeffs, g: &GroupPoint) -> Complex64 {
    match g {
        GroupPoint::Circle(theta) => a
            .coeffs
            .iter()
            .map(|(l, m)| match l {
                IrrepLabel::Circle(n) => m[(0, 0)] * Complex64::cis(*n as f64 * theta),
                _ => Complex64::new(0.0, 0.0),
            })
            .sum(),
        GroupPoint::Torus(theta) => a
            .coeffs
            .iter()
            .map(|(l, m)| match l {
                IrrepLabel::Torus(n) => {
                    let phase: f64 = n.iter().zip(theta).map(|(&k, t)| k as f64 * t).sum();
                    m[(0, 0)] * Complex64::cis(phase)
                }
                _ => Complex64::new(0.0, 0.0),
            })
            .sum(),
        GroupPoint::Su2(_) => a
            .coeffs
            .iter()
            .map(|(l, m)| match irrep_matrix(a.group, l, g) {
                Ok(p) => (p * m).trace() * l.degree() as f64,
                Err(_) => Complex64::new(0.0, 0.0),
            })
            .sum(),
    }
}

/// Synthesis at every node of `grid`.
pub fn synthesize_grid(a: &SpectralCoeffs, grid: &QuadratureGrid) -> Vec<Complex64> {
    let pairs: Vec<(&IrrepLabel, &DMatrix<Complex64>)> = a.coeffs.iter().collect();
    transform::synthesize_on_grid(&pairs, grid)
}

/// `A` with every coefficient at a label of `set` removed.
pub fn zero_on_set(a: &SpectralCoeffs, set: &BTreeSet<IrrepLabel>) -> SpectralCoeffs {
    SpectralCoeffs {
        group: a.group,
        coeffs: a
            .coeffs
            .iter()
            .filter(|(l, _)| !set.contains(*l))
            .map(|(l, m)| (l.clone(), m.clone()))
            .collect(),
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.sum()
}

/// `sum_pi d_pi ||A(pi)||_1`, an upper bound for the sup norm of the
/// synthesis.
pub fn kunze_sup_bound(a: &SpectralCoeffs) -> f64 {
    a.coeffs.iter().map(|(l, m)| l.degree() as f64 * trace_norm(m)).sum()
}

/// `sum_pi d_pi ||A(pi)||_HS^2`, the squared L2 norm of the synthesis.
pub fn l2_norm_sq(a: &SpectralCoeffs) -> f64 {
    a.coeffs.iter().map(|(l, m)| l.degree() as f64 * m.norm_squared()).sum()
}

/// `sum_pi d_pi sum_ij |A(pi)_ij|`.
pub fn entrywise_l1(a: &SpectralCoeffs) -> f64 {
    a.coeffs
        .iter()
        .map(|(l, m)| l.degree() as f64 * m.iter().map(|z| z.norm()).sum::<f64>())
        .sum()
}

/// Coefficients with entries drawn uniformly from the square `[-1, 1]^2`,
/// at every label of bandlimit at most `bandlimit`.
pub fn random_coeffs<R: rand::Rng + ?Sized>(group: Group, bandlimit: u32, rng: &mut R) -> SpectralCoeffs {
    let mut out = SpectralCoeffs::new(group);
    for l in enumerate_irreps(group, bandlimit) {
        let d = l.degree();
        let m = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        });
        out.coeffs.insert(l, m);
    }
    out
}

#[cfg(test)]
mod tests;
