use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::group::{enumerate_irreps, IrrepLabel};
use crate::spectral::analyze_labels;

fn one(group: Group) -> SpectralCoeffs {
    SpectralCoeffs::constant(group, Complex64::new(1.0, 0.0))
}

fn sqrt2_cos() -> SpectralCoeffs {
    let mut f = SpectralCoeffs::new(Group::Circle);
    let c = DMatrix::from_element(1, 1, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    f.insert(IrrepLabel::Circle(1), c.clone()).unwrap();
    f.insert(IrrepLabel::Circle(-1), c).unwrap();
    f
}

fn at(t: f64) -> GroupPoint {
    GroupPoint::circle(TAU * t)
}

// Composite Simpson rule on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn delta_signs_follow_cells() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 3).unwrap();
    assert_eq!(eval_delta(&tree, 1, &f, &at(0.25)).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(eval_delta(&tree, 1, &f, &at(0.75)).unwrap(), Complex64::new(-1.0, 0.0));
    assert_eq!(eval_delta(&tree, 3, &f, &at(0.3)).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(eval_delta(&tree, 3, &f, &at(0.4)).unwrap(), Complex64::new(-1.0, 0.0));
}

#[test]
fn psi_plateaus_and_ramps() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 2).unwrap();
    for ramp in [RampShape::Linear, RampShape::Smooth] {
        assert_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.25)).unwrap().re, 1.0);
        assert_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.7)).unwrap().re, -1.0);
        assert_abs_diff_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.5)).unwrap().re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.0)).unwrap().re, 0.0, epsilon = 1e-15);
        // ramp [0, 0.0625], midpoint at 0.03125
        assert_abs_diff_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.03125)).unwrap().re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eval_psi(&tree, 1, &f, ramp, &at(0.53125)).unwrap().re, -0.5, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(
        eval_psi(&tree, 1, &f, RampShape::Linear, &at(0.015625)).unwrap().re,
        0.25,
        epsilon = 1e-12
    );
}

#[test]
fn psi_is_bounded_by_f0_at_grid_nodes() {
    for (f, g) in [(sqrt2_cos(), Group::Circle), (one(Group::Su2), Group::Su2)] {
        let tree = DyadicTree::from_weight(&f, 4).unwrap();
        let grid = QuadratureGrid::fine(g, 4.0, 8, 256);
        let f0v = synthesize_grid(&f, &grid);
        for k in 1..=4 {
            let psi = WindowedFunction::psi(&tree, k, &f, RampShape::Smooth).unwrap();
            let delta = WindowedFunction::delta(&tree, k, &f).unwrap();
            for ((p, d), z) in psi.sample(&grid).iter().zip(delta.sample(&grid)).zip(&f0v) {
                assert!(p.norm() <= z.norm() + 1e-15);
                assert_abs_diff_eq!(d.norm(), z.norm(), epsilon = 1e-15);
            }
        }
    }
}

#[test]
fn deficit_linear_closed_form() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 6).unwrap();
    // four ramp edges of width s, each contributing s/3
    let s = 0.0625;
    assert_abs_diff_eq!(step2_deficit(&tree, 1, &f, RampShape::Linear).unwrap(), 4.0 * s / 3.0, epsilon = 1e-12);
    for k in 1..=6u32 {
        let s = 2f64.powi(-2 * k as i32 - 2);
        let edges = 2f64.powi(k as i32 + 1);
        assert_abs_diff_eq!(
            step2_deficit(&tree, k, &f, RampShape::Linear).unwrap(),
            edges * s / 3.0,
            epsilon = 1e-12
        );
    }
}

#[test]
fn deficit_smooth_matches_simpson() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 6).unwrap();
    let per_edge = simpson(|v| (1.0 - RampShape::Smooth.profile(v)).powi(2), 0.0, 1.0, 20_000);
    for k in 1..=6u32 {
        let s = 2f64.powi(-2 * k as i32 - 2);
        let edges = 2f64.powi(k as i32 + 1);
        assert_abs_diff_eq!(
            step2_deficit(&tree, k, &f, RampShape::Smooth).unwrap(),
            edges * s * per_edge,
            epsilon = 1e-12
        );
    }
}

#[test]
fn deficit_bound_and_monotone() {
    for f in [one(Group::Circle), sqrt2_cos()] {
        let sup_sq = if f.len() == 1 { 1.0 } else { 2.0 };
        let tree = DyadicTree::from_weight(&f, 6).unwrap();
        for ramp in [RampShape::Linear, RampShape::Smooth] {
            let mut prev = f64::INFINITY;
            for k in 1..=6u32 {
                let d = step2_deficit(&tree, k, &f, ramp).unwrap();
                assert!(d >= 0.0 && d <= 2f64.powi(-(k as i32)) * sup_sq + 1e-9);
                if f.len() == 1 {
                    assert!(d < prev);
                }
                prev = d;
            }
        }
    }
}

#[test]
fn deficit_matches_brute_force_quadrature() {
    let f = sqrt2_cos();
    let tree = DyadicTree::from_weight(&f, 3).unwrap();
    let grid = QuadratureGrid::uniform(Group::Circle, 1 << 18);
    for k in 1..=3 {
        let psi = WindowedFunction::psi(&tree, k, &f, RampShape::Smooth).unwrap().sample(&grid);
        let delta = WindowedFunction::delta(&tree, k, &f).unwrap().sample(&grid);
        let brute: f64 = psi
            .iter()
            .zip(&delta)
            .map(|(p, d)| (p - d).norm_sqr())
            .sum::<f64>()
            / grid.len() as f64;
        let exact = step2_deficit(&tree, k, &f, RampShape::Smooth).unwrap();
        assert!((brute - exact).abs() < 1e-5, "k={k}: {brute} vs {exact}");
    }
}

#[test]
fn su2_deficit_separates_for_constant_weight() {
    let f = one(Group::Su2);
    let tree = DyadicTree::from_weight(&f, 3).unwrap();
    for ramp in [RampShape::Linear, RampShape::Smooth] {
        for k in 1..=3u32 {
            let env = WindowEnvelope::new(&tree, k, ramp).unwrap();
            let cap = env.polar_cap().unwrap();
            let s = 2f64.powi(-2 * k as i32 - 2);
            let edges = 2f64.powi(k as i32 + 1);
            let q = |v: f64| ramp.profile(v);
            let t1 = edges * s * simpson(|v| (1.0 - q(v)).powi(2), 0.0, 1.0, 20_000);
            let t2 = edges * s * simpson(|v| 2.0 * q(v) * (1.0 - q(v)), 0.0, 1.0, 20_000);
            let core: f64 = env.cores().iter().map(|(a, b)| b - a).sum();
            let t3 = core + edges * s * simpson(|v| q(v) * q(v), 0.0, 1.0, 20_000);
            let pi = std::f64::consts::PI;
            let haar = |p: i32| simpson(|b| (1.0 - env.cap(b)).powi(p) * b.sin() / 2.0, 0.0, pi, 200_000);
            let want = t1 + t2 * haar(1) + t3 * haar(2);
            let got = step2_deficit(&tree, k, &f, ramp).unwrap();
            assert!((got - want).abs() < 1e-9, "{ramp:?} k={k}: {got} vs {want}");
            assert!(got <= 2f64.powi(-(k as i32)));
            assert!(cap.fraction > 0.0);
        }
    }
}

#[test]
fn rademacher_orthogonality() {
    for f in [one(Group::Circle), sqrt2_cos()] {
        let tree = DyadicTree::from_weight(&f, 6).unwrap();
        let norm = tree.cdf().unwrap().norm_sq();
        for k in 1..=6 {
            assert_abs_diff_eq!(delta_inner(&tree, k, k).unwrap(), norm, epsilon = 1e-8);
            for l in k + 1..=6 {
                assert!(delta_inner(&tree, k, l).unwrap().abs() < 1e-8);
            }
        }
    }
}

#[test]
fn delta_inner_matches_grid_quadrature() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 2).unwrap();
    let grid = QuadratureGrid::uniform(Group::Circle, 1 << 12);
    let d1 = WindowedFunction::delta(&tree, 1, &f).unwrap().sample(&grid);
    let d2 = WindowedFunction::delta(&tree, 2, &f).unwrap().sample(&grid);
    let q: Complex64 = d1.iter().zip(&d2).map(|(a, b)| a * b.conj()).sum::<Complex64>() / grid.len() as f64;
    assert!(q.norm() < 1e-9);
}

#[test]
fn window_series_match_fft_of_samples() {
    let f = sqrt2_cos();
    let tree = DyadicTree::from_weight(&f, 3).unwrap();
    let n = 1 << 16;
    for k in 1..=3 {
        let env = WindowEnvelope::new(&tree, k, RampShape::Smooth).unwrap();
        let series = env.series(Window::Ramped, 40);
        let mut buf: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(env.ramped(i as f64 / n as f64), 0.0))
            .collect();
        rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        for l in -40i64..=40 {
            let want = buf[l.rem_euclid(n as i64) as usize] / n as f64;
            assert!((series[(l + 40) as usize] - want).norm() < 1e-11, "k={k} l={l}");
        }
    }
}

#[test]
fn hard_series_closed_form() {
    let f = one(Group::Circle);
    let tree = DyadicTree::from_weight(&f, 1).unwrap();
    let env = WindowEnvelope::new(&tree, 1, RampShape::Smooth).unwrap();
    let s = env.series(Window::Hard, 3);
    // square wave: -2i/(pi l) at odd l, 0 at even l
    assert_abs_diff_eq!(s[3].norm(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!((s[4] - Complex64::new(0.0, -2.0 / std::f64::consts::PI)).norm(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s[5].norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn circle_coeffs_match_fine_analysis() {
    let f = sqrt2_cos();
    let tree = DyadicTree::from_weight(&f, 4).unwrap();
    let labels = enumerate_irreps(Group::Circle, 12);
    let grid = QuadratureGrid::uniform(Group::Circle, 1 << 16);
    for k in 1..=4 {
        let psi = WindowedFunction::psi(&tree, k, &f, RampShape::Smooth).unwrap();
        let exact = psi.coeffs(&labels);
        let sampled = analyze_labels(&GridFunction::sample(&psi, &grid), &grid, &labels).unwrap();
        assert!(exact.sub(&sampled).max_entry() < 1e-11, "k={k}");
    }
}

#[test]
fn torus_coeffs_match_fine_analysis() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let f = crate::spectral::random_coeffs(Group::Torus(2), 1, &mut rng);
    let tree = DyadicTree::from_weight(&f, 2).unwrap();
    let labels = enumerate_irreps(Group::Torus(2), 3);
    let grid = QuadratureGrid::uniform_sizes(Group::Torus(2), vec![1 << 14, 8]);
    let psi = WindowedFunction::psi(&tree, 2, &f, RampShape::Smooth).unwrap();
    let sampled = analyze_labels(&GridFunction::sample(&psi, &grid), &grid, &labels).unwrap();
    assert!(psi.coeffs(&labels).sub(&sampled).max_entry() < 1e-11);
}

#[test]
fn su2_coeffs_match_fine_analysis() {
    let f = one(Group::Su2);
    let tree = DyadicTree::from_weight(&f, 2).unwrap();
    let labels = enumerate_irreps(Group::Su2, 2);
    for k in 1..=2 {
        let psi = WindowedFunction::psi(&tree, k, &f, RampShape::Smooth).unwrap();
        let grid = QuadratureGrid::su2_pieces(1 << 12, 8, &psi.beta_breaks(), 160);
        let sampled = analyze_labels(&GridFunction::sample(&psi, &grid), &grid, &labels).unwrap();
        let exact = psi.coeffs(&labels);
        assert!(exact.sub(&sampled).max_entry() < 1e-10, "k={k}");
        let delta = WindowedFunction::delta(&tree, k, &f).unwrap();
        let dex = delta.coeffs(&labels);
        // the hard window has jumps, so the uniform alpha rule converges slowly
        let dgrid = QuadratureGrid::su2_pieces(1 << 14, 8, &[0.0, std::f64::consts::PI], 24);
        let dsam = analyze_labels(&GridFunction::sample(&delta, &dgrid), &dgrid, &labels).unwrap();
        assert!(dex.sub(&dsam).max_entry() < 1e-4, "k={k}");
    }
}

#[test]
fn coefficients_obey_bessel_and_decay() {
    for f in [one(Group::Circle), sqrt2_cos(), one(Group::Su2)] {
        let group = f.group();
        let tree = DyadicTree::from_weight(&f, 6).unwrap();
        let norm_inf = if f.len() == 2 { 2f64.sqrt() } else { 1.0 };
        let norm_2 = tree.cdf().unwrap().norm_sq().sqrt();
        let labels = enumerate_irreps(group, 2);
        let mut partial = std::collections::HashMap::<(usize, usize), f64>::new();
        let mut last = vec![f64::INFINITY; labels.len()];
        let mut third = vec![0.0; labels.len()];
        for k in 1..=6 {
            let c = psi_coeffs(&tree, k, &f, RampShape::Smooth, &labels).unwrap();
            for (i, l) in labels.iter().enumerate() {
                let m = c.get(l).unwrap();
                let bound = (norm_inf + norm_2).powi(2) / l.degree() as f64;
                for (e, z) in m.iter().enumerate() {
                    let p = partial.entry((i, e)).or_insert(0.0);
                    *p += z.norm_sqr();
                    assert!(*p <= bound);
                }
                if k >= 3 {
                    let top = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    assert!(top <= last[i] + 1e-12);
                    last[i] = top;
                    if k == 3 {
                        third[i] = top;
                    }
                }
            }
        }
        if f.len() == 1 {
            // equal cells make the window periodic, so low frequencies cancel exactly
            assert!(last.iter().all(|&x| x < 1e-12), "{group} {last:?}");
        } else {
            // cells widen near the zeros of cos, which slows the decay
            for (l, t) in last.iter().zip(&third) {
                assert!(*l < 0.75 * t || *l < 1e-9, "{last:?} {third:?}");
            }
        }
    }
}

#[test]
fn ramp_shape_parsing() {
    assert_eq!("smooth".parse::<RampShape>().unwrap(), RampShape::Smooth);
    assert_eq!("linear".parse::<RampShape>().unwrap(), RampShape::Linear);
    assert!("cubic".parse::<RampShape>().is_err());
    assert_eq!(serde_json::to_string(&RampShape::Linear).unwrap(), "\"linear\"");
    assert_eq!(RampShape::default(), RampShape::Smooth);
}
