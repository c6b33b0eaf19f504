use std::sync::OnceLock;

use num_complex::Complex64;

use super::RampShape;
use crate::group::{gauss_legendre, TAU};

const NODES: usize = 16;
/// Beyond this frequency the transform of a smooth ramp's derivative is
/// below double precision.
const SMOOTH_CUTOFF: f64 = 256.0;

/// Functions of the ramp value `q` integrated over a ramp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Piece {
    /// `q`
    Ramp,
    /// `(1 - q)^2`
    Defect1,
    /// `2 q (1 - q)`
    Defect2,
    /// `q^2`
    Defect3,
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(NODES))
}

fn value(shape: RampShape, piece: Piece, v: f64) -> f64 {
    let q = shape.profile(v);
    match piece {
        Piece::Ramp => q,
        Piece::Defect1 => (1.0 - q) * (1.0 - q),
        Piece::Defect2 => 2.0 * q * (1.0 - q),
        Piece::Defect3 => q * q,
    }
}

fn derivative(shape: RampShape, piece: Piece, v: f64) -> f64 {
    let q = shape.profile(v);
    let dq = shape.derivative(v);
    match piece {
        Piece::Ramp => dq,
        Piece::Defect1 => -2.0 * (1.0 - q) * dq,
        Piece::Defect2 => 2.0 * (1.0 - 2.0 * q) * dq,
        Piece::Defect3 => 2.0 * q * dq,
    }
}

/// `integral_0^1 f(v) e^{-i w v} dv` by composite Gauss-Legendre.
fn oscillatory(f: impl Fn(f64) -> f64, w: f64, panels: usize) -> Complex64 {
    let (x, wt) = rule();
    let h = 1.0 / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = p as f64 * h;
        for (xi, wi) in x.iter().zip(wt) {
            let v = lo + 0.5 * h * (xi + 1.0);
            acc += Complex64::cis(-w * v) * (f(v) * wi * 0.5 * h);
        }
    }
    acc
}

/// `R(xi) = integral_0^1 p(v) e^{-2 pi i xi v} dv` for the profile `p` of
/// `piece`. Large frequencies go through one integration by parts so that
/// the remaining integrand is a smooth bump.
pub(crate) fn ramp_transform(shape: RampShape, piece: Piece, xi: f64) -> Complex64 {
    let w = TAU * xi;
    if xi.abs() < 1.0 {
        return oscillatory(|v| value(shape, piece, v), w, 8);
    }
    let (p0, p1) = (value(shape, piece, 0.0), value(shape, piece, 1.0));
    let iw = Complex64::new(0.0, w);
    let boundary = (Complex64::cis(-w) * p1 - p0) / -iw;
    let tail = if shape == RampShape::Smooth && xi.abs() > SMOOTH_CUTOFF {
        Complex64::new(0.0, 0.0)
    } else {
        let panels = (2.0 * xi.abs()).ceil() as usize;
        oscillatory(|v| derivative(shape, piece, v), w, panels.max(8))
    };
    boundary + tail / iw
}
