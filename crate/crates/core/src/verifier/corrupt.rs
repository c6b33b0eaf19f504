//! Deliberately broken copies of a bundle, used as negative controls.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constructor::SystemBundle;
use crate::dyadic::shrink_amount;

/// Puts a coefficient of size `amount` at the first label of `Lambda_m` of
/// record `i`. Returns `None` when `Lambda_m` is empty.
pub fn inject_support(bundle: &SystemBundle, i: usize, amount: f64) -> Option<SystemBundle> {
    let mut out = bundle.clone();
    let r = &mut out.records[i];
    let label = r.lambda.first()?.clone();
    let d = label.degree();
    r.coeffs
        .insert(label, DMatrix::from_element(d, d, Complex64::new(amount, 0.0)))
        .expect("label of the bundle's group");
    Some(out)
}

/// Multiplies every coefficient of record `i` by `factor`.
pub fn scale_record(bundle: &SystemBundle, i: usize, factor: f64) -> SystemBundle {
    let mut out = bundle.clone();
    let r = &mut out.records[i];
    r.coeffs = r.coeffs.scaled(Complex64::new(factor, 0.0));
    out
}

/// Widens every stored core of record `i` by a tenth of its shrink amount
/// on each side.
pub fn inflate_omega(bundle: &SystemBundle, i: usize) -> SystemBundle {
    let mut out = bundle.clone();
    let cells = out.tree.cells(out.records[i].k_m).expect("record level within tree");
    let r = &mut out.records[i];
    for (core, (a, b)) in r.omega.iter_mut().zip(cells) {
        let s = shrink_amount(r.k_m, b - a) / 10.0;
        *core = (core.0 - s, core.1 + s);
    }
    out
}
