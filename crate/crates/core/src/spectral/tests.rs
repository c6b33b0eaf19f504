use super::*;
use crate::group::haar_grid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn coeff_diff(a: &SpectralCoeffs, b: &SpectralCoeffs) -> f64 {
    let mut worst = 0.0f64;
    for (l, m) in a.iter() {
        let other = b.get(l).cloned().unwrap_or_else(|| DMatrix::zeros(m.nrows(), m.ncols()));
        worst = worst.max(max_diff(m, &other));
    }
    for (l, m) in b.iter() {
        if a.get(l).is_none() {
            worst = worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

const GROUPS: [Group; 3] = [Group::Circle, Group::Torus(2), Group::Su2];

#[test]
fn constant_function_coefficients() {
    for g in GROUPS {
        let grid = haar_grid(g, 2);
        let one = GridFunction::from_fn(&grid, |_| Complex64::new(1.0, 0.0));
        for l in enumerate_irreps(g, 2) {
            let c = fourier_coeff(&one, &l, &grid).unwrap();
            if l.is_trivial() {
                assert!((c[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            } else {
                assert!(c.iter().all(|z| z.norm() < 1e-12), "{g} {l}");
            }
        }
        assert!(analyze(&GridFunction::from_fn(&grid, |_| Complex64::new(0.0, 0.0)), &grid, 2)
            .unwrap()
            .support()
            .is_empty());
    }
}

#[test]
fn square_wave_first_coefficient() {
    let n = 1 << 20;
    let grid = QuadratureGrid::uniform(Group::Circle, n);
    let f = GridFunction::from_fn(&grid, |p| {
        if crate::group::sweep_coordinate(p) < 0.5 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    });
    let c = analyze_labels(&f, &grid, &[IrrepLabel::Circle(1)]).unwrap();
    let expect = Complex64::new(0.0, -2.0 / std::f64::consts::PI);
    // sampling a jump at a node costs O(1/n)
    assert!((c.get(&IrrepLabel::Circle(1)).unwrap()[(0, 0)] - expect).norm() < 1e-5);
}

#[test]
fn matrix_coefficient_lands_at_dual_position() {
    let label = IrrepLabel::Su2 { two_j: 3 };
    let grid = haar_grid(Group::Su2, 3);
    for (i, j) in [(0, 0), (1, 3), (2, 1)] {
        let f = GridFunction::from_fn(&grid, |p| {
            irrep_matrix(Group::Su2, &label, p).unwrap()[(i, j)] * label.degree() as f64
        });
        let a = analyze(&f, &grid, 3).unwrap();
        for (l, m) in a.iter() {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let expect = if *l == label && r == j && c == i { 1.0 } else { 0.0 };
                    assert!((m[(r, c)] - expect).norm() < 1e-10, "{l} ({r},{c})");
                }
            }
        }
    }
}

#[test]
fn structured_routes_match_naive_routes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in GROUPS {
        let a = random_coeffs(g, 2, &mut rng);
        let grid = haar_grid(g, 3);
        let fast = synthesize_grid(&a, &grid);
        for (i, p) in grid.points().enumerate() {
            assert!((fast[i] - synthesize(&a, &p)).norm() < 1e-11, "{g} node {i}");
        }
        let f = GridFunction::new(&grid, fast).unwrap();
        let back = analyze(&f, &grid, 3).unwrap();
        for (l, m) in back.iter() {
            let naive = fourier_coeff(&f, l, &grid).unwrap();
            assert!(max_diff(m, &naive) < 1e-11, "{g} {l}");
        }
    }
}

#[test]
fn round_trip_and_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in GROUPS {
        for _ in 0..10 {
            let a = random_coeffs(g, 3, &mut rng);
            let grid = haar_grid(g, 3);
            let samples = synthesize_grid(&a, &grid);
            let l2: f64 = samples.iter().zip(grid.weights()).map(|(v, w)| v.norm_sqr() * w).sum();
            assert!((l2 - l2_norm_sq(&a)).abs() < 1e-9 * l2.max(1.0));
            let back = analyze(&GridFunction::new(&grid, samples).unwrap(), &grid, 3).unwrap();
            assert!(coeff_diff(&a, &back) < 1e-9, "{g}");
        }
    }
}

#[test]
fn streaming_analysis_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_coeffs(Group::Su2, 2, &mut rng);
    let grid = QuadratureGrid::su2(8, 5, 16);
    let labels = enumerate_irreps(Group::Su2, 2);
    let direct = analyze_labels(&GridFunction::sample(&a, &grid), &grid, &labels).unwrap();
    let streamed = analyze_streaming(&a, &grid, &labels).unwrap();
    assert!(coeff_diff(&direct, &streamed) < 1e-13);
}

#[test]
fn zero_on_set_is_linear_subtraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in GROUPS {
        let a = random_coeffs(g, 2, &mut rng);
        assert_eq!(zero_on_set(&a, &BTreeSet::new()), a);
        let all: BTreeSet<_> = a.labels().cloned().collect();
        assert!(zero_on_set(&a, &all).is_empty());
        let some: BTreeSet<_> = a.labels().step_by(2).cloned().collect();
        let z = zero_on_set(&a, &some);
        assert!(z.support().is_disjoint(&some));
        let r = a.restrict(&some);
        for _ in 0..20 {
            let p = g.random_point(&mut rng);
            let lhs = synthesize(&z, &p);
            let rhs = synthesize(&a, &p) - synthesize(&r, &p);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

// Oracle: singular values as square roots of the eigenvalues of M^H M.
fn trace_norm_oracle(m: &DMatrix<Complex64>) -> f64 {
    let h = m.adjoint() * m;
    h.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).sum()
}

#[test]
fn trace_norm_examples() {
    assert!((trace_norm(&DMatrix::identity(2, 2)) - 2.0).abs() < 1e-14);
    let mut nil = DMatrix::zeros(2, 2);
    nil[(0, 1)] = Complex64::new(1.0, 0.0);
    assert!((trace_norm(&nil) - 1.0).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [3usize, 8, 17, 32] {
        let m = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let got = trace_norm(&m);
        let oracle = trace_norm_oracle(&m);
        assert!((got - oracle).abs() < 1e-10 * oracle, "d={d}");
        assert!(got <= m.iter().map(|z| z.norm()).sum::<f64>() + 1e-12);
    }
}

#[test]
fn kunze_bound_dominates_grid_sup() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let single = SpectralCoeffs::constant(Group::Circle, Complex64::new(0.3, -0.4));
    assert!((kunze_sup_bound(&single) - 0.5).abs() < 1e-15);
    // the (1,1) entry of the spin-1/2 representation
    let label = IrrepLabel::Su2 { two_j: 1 };
    let grid = haar_grid(Group::Su2, 1);
    let f = GridFunction::from_fn(&grid, |p| irrep_matrix(Group::Su2, &label, p).unwrap()[(0, 0)]);
    let a = analyze(&f, &grid, 1).unwrap().normalized();
    let dense = QuadratureGrid::su2(64, 64, 128);
    let sup = synthesize_grid(&a, &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(kunze_sup_bound(&a) >= sup - 1e-12);
    for g in GROUPS {
        let dense = QuadratureGrid::fine(g, 2.0, 8, 64);
        for _ in 0..20 {
            let a = random_coeffs(g, 2, &mut rng);
            let sup = synthesize_grid(&a, &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(kunze_sup_bound(&a) - sup >= -1e-10);
        }
    }
}

#[test]
fn serialization_round_trip_keeps_label_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for g in GROUPS {
        let a = random_coeffs(g, 2, &mut rng);
        let text = serde_json::to_string(&a).unwrap();
        let raw: RawCoeffs = serde_json::from_str(&text).unwrap();
        let keys: Vec<String> = raw.0.iter().map(|(k, _)| k.clone()).collect();
        let expect: Vec<String> = a.labels().map(|l| l.to_string()).collect();
        assert_eq!(keys, expect);
        assert_eq!(SpectralCoeffs::from_raw(g, &raw).unwrap(), a);
    }
    let text = r#"{"j=1/2": [[1.0, 0.0], [0.0, 2.0], [0.5, 0.0], [0.0, 0.0]]}"#;
    let a = SpectralCoeffs::from_raw(Group::Su2, &serde_json::from_str(text).unwrap()).unwrap();
    assert_eq!(a.get(&IrrepLabel::Su2 { two_j: 1 }).unwrap()[(0, 1)], Complex64::new(0.0, 2.0));
    let bad = r#"{"j=1": [[1.0, 0.0]]}"#;
    assert!(SpectralCoeffs::from_raw(Group::Su2, &serde_json::from_str(bad).unwrap()).is_err());
}

#[test]
fn support_threshold_is_relative() {
    let mut a = SpectralCoeffs::constant(Group::Circle, Complex64::new(1e3, 0.0));
    a.insert(IrrepLabel::Circle(1), DMatrix::from_element(1, 1, Complex64::new(1e-10, 0.0)))
        .unwrap();
    a.insert(IrrepLabel::Circle(2), DMatrix::from_element(1, 1, Complex64::new(1e-8, 0.0)))
        .unwrap();
    let s = a.support();
    assert!(!s.contains(&IrrepLabel::Circle(1)));
    assert!(s.contains(&IrrepLabel::Circle(2)));
    assert_eq!(a.normalized().len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_below_entrywise_l1(entries in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..=49)) {
        let d = (entries.len() as f64).sqrt().floor() as usize;
        let m = DMatrix::from_fn(d, d, |r, c| {
            let (re, im) = entries[r * d + c];
            Complex64::new(re, im)
        });
        let l1: f64 = m.iter().map(|z| z.norm()).sum();
        prop_assert!(trace_norm(&m) <= l1 * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn circle_round_trip(seed in 0u64..1000, band in 0u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_coeffs(Group::Circle, band, &mut rng);
        let grid = haar_grid(Group::Circle, band);
        let back = analyze(&GridFunction::new(&grid, synthesize_grid(&a, &grid)).unwrap(), &grid, band).unwrap();
        prop_assert!(coeff_diff(&a, &back) < 1e-10);
    }

    #[test]
    fn su2_kunze_bound_holds_at_random_points(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_coeffs(Group::Su2, 1, &mut rng);
        let bound = kunze_sup_bound(&a);
        for _ in 0..16 {
            let p = Group::Su2.random_point(&mut rng);
            prop_assert!(synthesize(&a, &p).norm() <= bound + 1e-10);
        }
    }
}
