use num_complex::Complex64;

use super::TAU;

/// z-y-z Euler angles on SU(2) in the fundamental ranges
/// `alpha in [0, 2pi)`, `beta in [0, pi]`, `gamma in [0, 4pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// A point of one of the catalog groups, always stored in normalized form.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupPoint {
    Circle(f64),
    Torus(Vec<f64>),
    Su2(EulerAngles),
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

impl GroupPoint {
    pub fn circle(theta: f64) -> Self {
        GroupPoint::Circle(wrap(theta, TAU))
    }

    pub fn torus(theta: Vec<f64>) -> Self {
        GroupPoint::Torus(theta.into_iter().map(|t| wrap(t, TAU)).collect())
    }

    /// Builds an SU(2) point from arbitrary Euler angles. Angles already in
    /// range keep their `alpha`; otherwise the element is re-derived from its
    /// matrix.
    pub fn su2(alpha: f64, beta: f64, gamma: f64) -> Self {
        if !(0.0..=std::f64::consts::PI).contains(&beta) {
            return GroupPoint::Su2(Su2Element::from_euler(alpha, beta, gamma).to_euler());
        }
        GroupPoint::Su2(reduce_alpha(alpha, beta, gamma))
    }

    /// The raw coordinates, in the order used by the descriptor.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            GroupPoint::Circle(t) => vec![*t],
            GroupPoint::Torus(t) => t.clone(),
            GroupPoint::Su2(e) => vec![e.alpha, e.beta, e.gamma],
        }
    }
}

// U(a + 2pi k, b, c) = U(a, b, c + 2pi k), so alpha is reduced mod 2pi with a
// compensating shift of gamma.
fn reduce_alpha(alpha: f64, beta: f64, gamma: f64) -> EulerAngles {
    let k = (alpha / TAU).floor();
    let a = wrap(alpha - k * TAU, TAU);
    let c = wrap(gamma + k * TAU, 2.0 * TAU);
    EulerAngles {
        alpha: a,
        beta,
        gamma: c,
    }
}

/// An SU(2) element `[[a, -conj(b)], [b, conj(a)]]` with `|a|^2 + |b|^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Element {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2Element {
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        let (s, c) = (beta / 2.0).sin_cos();
        Su2Element {
            a: Complex64::cis(-(alpha + gamma) / 2.0) * c,
            b: Complex64::cis((alpha - gamma) / 2.0) * s,
        }
    }

    pub fn from_point(e: &EulerAngles) -> Self {
        Self::from_euler(e.alpha, e.beta, e.gamma)
    }

    pub fn mul(&self, rhs: &Su2Element) -> Su2Element {
        Su2Element {
            a: self.a * rhs.a - self.b.conj() * rhs.b,
            b: self.b * rhs.a + self.a.conj() * rhs.b,
        }
    }

    pub fn to_euler(&self) -> EulerAngles {
        let (na, nb) = (self.a.norm(), self.b.norm());
        let beta = 2.0 * nb.atan2(na);
        let (alpha, gamma) = if nb < 1e-300 {
            (0.0, -2.0 * self.a.arg())
        } else if na < 1e-300 {
            (2.0 * self.b.arg(), 0.0)
        } else {
            let (pa, pb) = (self.a.arg(), self.b.arg());
            (pb - pa, -pa - pb)
        };
        reduce_alpha(alpha, beta.clamp(0.0, std::f64::consts::PI), gamma)
    }

    pub fn to_point(&self) -> GroupPoint {
        GroupPoint::Su2(self.to_euler())
    }
}
