//! Concrete infinite compact groups: the circle, the d-torus and SU(2).
//!
//! Each group comes with its dual object (irreducible representation
//! labels), explicit unitary matrix coefficients, Haar quadrature grids and
//! a measurable sweep coordinate `t: G -> [0, 1)` whose pushforward of the
//! normalized Haar measure is the Lebesgue measure. Dyadic sets are realized
//! as preimages of intervals under that coordinate.

mod label;
mod point;
mod quadrature;
pub mod wigner;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use label::{enumerate_irreps, IrrepLabel};
pub use point::{EulerAngles, GroupPoint, Su2Element};
pub use quadrature::{gauss_legendre, haar_grid, GridLayout, QuadratureGrid};

pub(crate) const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("unknown group descriptor `{0}` (expected circle, torus:d or su2)")]
    Unknown(String),
    #[error("finite group `{0}` is not supported: the Haar measure must be atomless")]
    Finite(String),
    #[error("torus dimension must be at least 2, got {0}")]
    TorusDimension(usize),
    #[error("label {label} does not belong to group {group}")]
    LabelMismatch { label: String, group: String },
    #[error("point does not belong to group {0}")]
    PointMismatch(String),
    #[error("cannot parse irrep label `{0}`")]
    BadLabel(String),
}

/// An infinite compact group from the supported catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    Circle,
    Torus(usize),
    Su2,
}

impl Group {
    pub fn torus(dim: usize) -> Result<Self, GroupError> {
        if dim < 2 {
            return Err(GroupError::TorusDimension(dim));
        }
        Ok(Group::Torus(dim))
    }

    /// Number of coordinates of a group point.
    pub fn dimension(&self) -> usize {
        match self {
            Group::Circle => 1,
            Group::Torus(d) => *d,
            Group::Su2 => 3,
        }
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self, Group::Su2)
    }

    pub fn identity(&self) -> GroupPoint {
        match self {
            Group::Circle => GroupPoint::Circle(0.0),
            Group::Torus(d) => GroupPoint::Torus(vec![0.0; *d]),
            Group::Su2 => GroupPoint::Su2(EulerAngles {
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
            }),
        }
    }

    /// Samples a Haar-distributed random point.
    pub fn random_point<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GroupPoint {
        match self {
            Group::Circle => GroupPoint::circle(rng.random::<f64>() * TAU),
            Group::Torus(d) => GroupPoint::torus((0..*d).map(|_| rng.random::<f64>() * TAU).collect()),
            Group::Su2 => {
                let alpha = rng.random::<f64>() * TAU;
                let cos_beta = 2.0 * rng.random::<f64>() - 1.0;
                let gamma = rng.random::<f64>() * 2.0 * TAU;
                GroupPoint::su2(alpha, cos_beta.clamp(-1.0, 1.0).acos(), gamma)
            }
        }
    }

    pub(crate) fn check_label(&self, label: &IrrepLabel) -> Result<(), GroupError> {
        let ok = match (self, label) {
            (Group::Circle, IrrepLabel::Circle(_)) => true,
            (Group::Torus(d), IrrepLabel::Torus(n)) => n.len() == *d,
            (Group::Su2, IrrepLabel::Su2 { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(GroupError::LabelMismatch {
                label: label.to_string(),
                group: self.to_string(),
            })
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Circle => write!(f, "circle"),
            Group::Torus(d) => write!(f, "torus:{d}"),
            Group::Su2 => write!(f, "su2"),
        }
    }
}

impl FromStr for Group {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "circle" | "t" | "u1" => return Ok(Group::Circle),
            "su2" => return Ok(Group::Su2),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("torus:") {
            let d: usize = rest.parse().map_err(|_| GroupError::Unknown(s.to_string()))?;
            return Group::torus(d);
        }
        for prefix in ["cyclic:", "z:", "finite:", "dihedral:", "symmetric:"] {
            if lower.starts_with(prefix) {
                return Err(GroupError::Finite(s.to_string()));
            }
        }
        Err(GroupError::Unknown(s.to_string()))
    }
}

/// Unitary matrix of the irreducible representation `label` at `g`.
///
/// Circle and torus representations are the characters `e^{i n.theta}`. For
/// SU(2) the Wigner matrix in the z-y-z convention is returned, rows and
/// columns indexed by `m = j, j-1, ..., -j`:
/// `D^j_{m'm}(alpha, beta, gamma) = e^{-i m' alpha} d^j_{m'm}(beta) e^{-i m gamma}`.
pub fn irrep_matrix(
    group: Group,
    label: &IrrepLabel,
    g: &GroupPoint,
) -> Result<DMatrix<Complex64>, GroupError> {
    group.check_label(label)?;
    match (label, g) {
        (IrrepLabel::Circle(n), GroupPoint::Circle(theta)) => {
            Ok(DMatrix::from_element(1, 1, Complex64::cis(*n as f64 * theta)))
        }
        (IrrepLabel::Torus(n), GroupPoint::Torus(theta)) if theta.len() == n.len() => {
            let phase: f64 = n.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
            Ok(DMatrix::from_element(1, 1, Complex64::cis(phase)))
        }
        (IrrepLabel::Su2 { two_j }, GroupPoint::Su2(e)) => Ok(wigner::wigner_d(*two_j, e)),
        _ => Err(GroupError::PointMismatch(group.to_string())),
    }
}

/// The sweep coordinate `t(g)`: the first angle divided by its period.
pub fn sweep_coordinate(g: &GroupPoint) -> f64 {
    let t = match g {
        GroupPoint::Circle(theta) => theta / TAU,
        GroupPoint::Torus(theta) => theta[0] / TAU,
        GroupPoint::Su2(e) => e.alpha / TAU,
    };
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Haar measure of the band `t^{-1}[a, b)`. The pushforward is uniform, so
/// this is the interval length.
pub fn sweep_interval_mu(a: f64, b: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a) && (a..=1.0).contains(&b));
    (b - a).max(0.0)
}
