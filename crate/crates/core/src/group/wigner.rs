//! Wigner small-d and D matrices for SU(2).
//!
//! Indices run over `m = j, j-1, ..., -j`; row `r` carries `m' = j - r` and
//! column `c` carries `m = j - c`. Small-d is evaluated through Jacobi
//! polynomials with the normalization assembled from log-factorials.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::EulerAngles;

const LOG_FACT_LEN: usize = 1024;

fn log_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACT_LEN);
        t.push(0.0);
        for i in 1..LOG_FACT_LEN {
            t.push(t[i - 1] + (i as f64).ln());
        }
        t
    });
    table[n]
}

fn log_binomial(n: usize, k: usize) -> f64 {
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

/// Jacobi polynomial `P_n^{(a, b)}(x)` by the three-term recurrence.
pub fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c0 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Single entry `d^j_{m'm}(beta)`, arguments given as `2j, 2m', 2m`.
pub fn small_d_entry(two_j: u32, two_mp: i64, two_m: i64, beta: f64) -> f64 {
    let tj = two_j as i64;
    let jpm = ((tj + two_m) / 2) as usize;
    let jmm = ((tj - two_m) / 2) as usize;
    let jpmp = ((tj + two_mp) / 2) as usize;
    let jmmp = ((tj - two_mp) / 2) as usize;
    let k = jpm.min(jmm).min(jpmp).min(jmmp);
    let diff = (two_mp - two_m) / 2;
    let (a, lambda) = if k == jpm {
        (diff, diff)
    } else if k == jmm || k == jpmp {
        (-diff, 0)
    } else {
        (diff, diff)
    };
    let a = a as usize;
    let b = two_j as usize - 2 * k - a;
    let norm = (0.5 * (log_binomial(two_j as usize - k, k + a) - log_binomial(k + b, b))).exp();
    let (s, c) = (beta / 2.0).sin_cos();
    let sign = if lambda.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    sign * norm * s.powi(a as i32) * c.powi(b as i32) * jacobi(k, a as f64, b as f64, beta.cos())
}

/// The real orthogonal matrix `d^j(beta)`.
pub fn small_d(two_j: u32, beta: f64) -> DMatrix<f64> {
    let n = two_j as usize + 1;
    let tj = two_j as i64;
    DMatrix::from_fn(n, n, |r, c| {
        small_d_entry(two_j, tj - 2 * r as i64, tj - 2 * c as i64, beta)
    })
}

/// The unitary Wigner matrix `D^j(alpha, beta, gamma)`.
pub fn wigner_d(two_j: u32, e: &EulerAngles) -> DMatrix<Complex64> {
    let d = small_d(two_j, e.beta);
    let n = d.nrows();
    let tj = two_j as f64;
    let left: Vec<Complex64> = (0..n).map(|r| Complex64::cis(-(tj / 2.0 - r as f64) * e.alpha)).collect();
    let right: Vec<Complex64> = (0..n).map(|c| Complex64::cis(-(tj / 2.0 - c as f64) * e.gamma)).collect();
    DMatrix::from_fn(n, n, |r, c| left[r] * d[(r, c)] * right[c])
}
