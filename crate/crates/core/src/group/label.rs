use std::cmp::Ordering;
use std::fmt;

use super::{Group, GroupError};

/// Label of an irreducible unitary representation.
///
/// SU(2) spins are stored as the integer `2j` so that half-integers never
/// become floating point keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IrrepLabel {
    Circle(i64),
    Torus(Vec<i64>),
    Su2 { two_j: u32 },
}

impl IrrepLabel {
    /// Dimension `d_pi` of the representation space.
    pub fn degree(&self) -> usize {
        match self {
            IrrepLabel::Su2 { two_j } => *two_j as usize + 1,
            _ => 1,
        }
    }

    /// Twice the bandlimit, an integer for every label.
    pub fn band2(&self) -> u64 {
        match self {
            IrrepLabel::Circle(n) => 2 * n.unsigned_abs(),
            IrrepLabel::Torus(v) => 2 * v.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0),
            IrrepLabel::Su2 { two_j } => *two_j as u64,
        }
    }

    /// `|n|` on the circle, the max-norm on the torus and `j` on SU(2).
    pub fn bandlimit(&self) -> f64 {
        self.band2() as f64 / 2.0
    }

    pub fn is_trivial(&self) -> bool {
        self.band2() == 0
    }

    pub fn parse(group: Group, s: &str) -> Result<Self, GroupError> {
        let bad = || GroupError::BadLabel(s.to_string());
        let s = s.trim();
        let label = match group {
            Group::Circle => {
                let v = s.strip_prefix("n=").ok_or_else(bad)?;
                IrrepLabel::Circle(v.trim().parse().map_err(|_| bad())?)
            }
            Group::Torus(_) => {
                let v = s
                    .strip_prefix("n=(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let parts: Result<Vec<i64>, _> = v.split(',').map(|p| p.trim().parse::<i64>()).collect();
                IrrepLabel::Torus(parts.map_err(|_| bad())?)
            }
            Group::Su2 => {
                let v = s.strip_prefix("j=").ok_or_else(bad)?.trim();
                let two_j = match v.split_once('/') {
                    Some((num, "2")) => num.trim().parse::<u32>().map_err(|_| bad())?,
                    Some(_) => return Err(bad()),
                    None => 2 * v.parse::<u32>().map_err(|_| bad())?,
                };
                IrrepLabel::Su2 { two_j }
            }
        };
        group.check_label(&label)?;
        Ok(label)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Circle(n) => write!(f, "n={n}"),
            IrrepLabel::Torus(v) => {
                let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                write!(f, "n=({})", parts.join(","))
            }
            IrrepLabel::Su2 { two_j } if two_j % 2 == 0 => write!(f, "j={}", two_j / 2),
            IrrepLabel::Su2 { two_j } => write!(f, "j={two_j}/2"),
        }
    }
}

impl Ord for IrrepLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.band2().cmp(&other.band2()).then_with(|| match (self, other) {
            (IrrepLabel::Circle(a), IrrepLabel::Circle(b)) => a.cmp(b),
            (IrrepLabel::Torus(a), IrrepLabel::Torus(b)) => a.cmp(b),
            (IrrepLabel::Su2 { two_j: a }, IrrepLabel::Su2 { two_j: b }) => a.cmp(b),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        })
    }
}

impl PartialOrd for IrrepLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl IrrepLabel {
    fn variant_rank(&self) -> u8 {
        match self {
            IrrepLabel::Circle(_) => 0,
            IrrepLabel::Torus(_) => 1,
            IrrepLabel::Su2 { .. } => 2,
        }
    }
}

/// All labels of bandlimit at most `bandlimit`, in canonical order.
///
/// SU(2) includes every spin `j <= bandlimit`, i.e. `2j in {0, ..., 2B}`.
pub fn enumerate_irreps(group: Group, bandlimit: u32) -> Vec<IrrepLabel> {
    let b = bandlimit as i64;
    let mut out: Vec<IrrepLabel> = match group {
        Group::Circle => (-b..=b).map(IrrepLabel::Circle).collect(),
        Group::Torus(d) => {
            let side = (2 * b + 1) as usize;
            let total = side.pow(d as u32);
            (0..total)
                .map(|mut idx| {
                    let mut v = vec![0i64; d];
                    for slot in v.iter_mut().rev() {
                        *slot = (idx % side) as i64 - b;
                        idx /= side;
                    }
                    IrrepLabel::Torus(v)
                })
                .collect()
        }
        Group::Su2 => (0..=2 * bandlimit).map(|two_j| IrrepLabel::Su2 { two_j }).collect(),
    };
    out.sort();
    out
}
